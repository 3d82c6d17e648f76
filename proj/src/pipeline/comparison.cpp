#include <json.hpp>

#include <cmath>

#include "periocular/error.hpp"
#include "periocular/pipeline.hpp"

namespace periocular {

namespace {

using ojson = nlohmann::ordered_json;

std::optional<double> finite_decidability(const VerificationReport& r) {
  if (r.decidability_state != DecidabilityState::finite) return std::nullopt;
  return r.decidability;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson delta_json(const MetricDelta& d) {
  return ojson{{"before", optional_json(d.before)},
               {"after", optional_json(d.after)},
               {"absolute", optional_json(d.absolute)},
               {"relative", optional_json(d.relative)},
               {"percent", d.percent ? ojson(*d.percent) : ojson(nullptr)}};
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

MetricDelta metric_delta(std::optional<double> before, std::optional<double> after) {
  MetricDelta d;
  d.before = before;
  d.after = after;
  if (!before || !after) return d;
  d.absolute = *after - *before;
  if (*before != 0.0) {
    d.relative = *after / *before - 1.0;
    // nudge away from zero so that e.g. 0.28 stored as 0.27999... still reads 28
    const double pct = *d.relative * 100.0;
    d.percent = static_cast<long>(std::trunc(pct + std::copysign(1e-9, pct)));
  }
  return d;
}

ReportComparison compare_reports(const VerificationReport& before, const VerificationReport& after) {
  if (before.matcher_id != after.matcher_id)
    throw InvalidArgument("cannot compare reports of '" + before.matcher_id + "' and '" + after.matcher_id + "'");
  return {before.matcher_id, metric_delta(finite_decidability(before), finite_decidability(after)),
          metric_delta(before.auc, after.auc)};
}

RunAggregate aggregate_reports(std::span<const VerificationReport> reports) {
  if (reports.empty()) throw InvalidArgument("no reports to aggregate");
  RunAggregate a;
  a.matcher_id = reports.front().matcher_id;
  a.variant = reports.front().variant;
  a.runs = reports.size();
  std::vector<double> aucs, ds;
  for (const auto& r : reports) {
    if (r.matcher_id != a.matcher_id || r.variant != a.variant)
      throw InvalidArgument("reports to aggregate must share matcher and variant");
    aucs.push_back(r.auc);
    if (r.decidability_state == DecidabilityState::finite) ds.push_back(r.decidability);
  }
  a.auc_mean = mean(aucs);
  a.auc_stddev = stddev(aucs);
  if (ds.size() == reports.size()) {
    a.decidability_mean = mean(ds);
    a.decidability_stddev = stddev(ds);
  }
  return a;
}

ReportComparison compare_report_sets(std::span<const VerificationReport> before,
                                     std::span<const VerificationReport> after) {
  const auto b = aggregate_reports(before);
  const auto a = aggregate_reports(after);
  if (a.matcher_id != b.matcher_id)
    throw InvalidArgument("cannot compare runs of '" + b.matcher_id + "' and '" + a.matcher_id + "'");
  return {b.matcher_id, metric_delta(b.decidability_mean, a.decidability_mean), metric_delta(b.auc_mean, a.auc_mean)};
}

std::string comparison_to_json(std::span<const ReportComparison> comparisons) {
  ojson out = ojson::array();
  for (const auto& c : comparisons)
    out.push_back(ojson{{"matcher_id", c.matcher_id},
                        {"decidability", delta_json(c.decidability)},
                        {"auc", delta_json(c.auc)}});
  return out.dump(2);
}

}  // namespace periocular
