#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>

#include "periocular/metrics.hpp"

namespace periocular {

namespace {

void require_non_empty(const ScoreSet& s) {
  if (s.genuine.empty() || s.impostor.empty())
    throw InvalidArgument("metric needs both genuine and impostor scores");
}

double mean_of(std::span<const double> v) {
  double sum = 0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double decidability(const ScoreSet& s) {
  if (s.genuine.size() < 2 || s.impostor.size() < 2)
    throw InvalidArgument("decidability needs at least 2 genuine and 2 impostor scores");
  const double mg = mean_of(s.genuine), mi = mean_of(s.impostor);
  const double pooled = (sample_variance(s.genuine, mg) + sample_variance(s.impostor, mi)) / 2.0;
  if (pooled <= 0.0)
    throw DegenerateDistributionError("decidability undefined: both score distributions have zero variance");
  return std::abs(mg - mi) / std::sqrt(pooled);
}

double auc(const ScoreSet& s) {
  require_non_empty(s);
  std::vector<double> g(s.genuine), im(s.impostor);
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  // twice the Mann-Whitney U, kept integral: 2 * #(g > i) + #(g == i)
  std::uint64_t twice_u = 0;
  std::size_t lo = 0, hi = 0;  // im[0, lo) < x, im[0, hi) <= x
  for (double x : g) {
    while (lo < im.size() && im[lo] < x) ++lo;
    if (hi < lo) hi = lo;
    while (hi < im.size() && im[hi] <= x) ++hi;
    twice_u += 2 * static_cast<std::uint64_t>(lo) + static_cast<std::uint64_t>(hi - lo);
  }
  const double pairs = static_cast<double>(g.size()) * static_cast<double>(im.size());
  return static_cast<double>(twice_u) / (2.0 * pairs);
}

std::vector<RocPoint> roc_curve(const ScoreSet& s) {
  require_non_empty(s);
  std::vector<double> g(s.genuine), im(s.impostor);
  std::sort(g.begin(), g.end(), std::greater<>());
  std::sort(im.begin(), im.end(), std::greater<>());
  const double ng = static_cast<double>(g.size()), ni = static_cast<double>(im.size());

  std::vector<RocPoint> roc;
  roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t gi = 0, ii = 0;
  while (gi < g.size() || ii < im.size()) {
    double t = -std::numeric_limits<double>::infinity();
    if (gi < g.size()) t = g[gi];
    if (ii < im.size()) t = std::max(t, im[ii]);
    while (gi < g.size() && g[gi] >= t) ++gi;
    while (ii < im.size() && im[ii] >= t) ++ii;
    roc.push_back({t, static_cast<double>(ii) / ni, static_cast<double>(gi) / ng});
  }
  return roc;
}

double roc_area(std::span<const RocPoint> roc) {
  double area = 0;
  for (std::size_t i = 1; i < roc.size(); ++i)
    area += (roc[i].far - roc[i - 1].far) * (roc[i].tar + roc[i - 1].tar) * 0.5;
  return area;
}

double eer_from_roc(std::span<const RocPoint> roc) {
  if (roc.empty()) throw InvalidArgument("empty ROC curve");
  auto gap = [](const RocPoint& p) { return p.far - (1.0 - p.tar); };
  if (gap(roc.front()) >= 0) return roc.front().far;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    const double d1 = gap(roc[i]);
    if (d1 < 0) continue;
    if (d1 == 0) return roc[i].far;
    const double d0 = gap(roc[i - 1]);
    const double t = -d0 / (d1 - d0);
    return roc[i - 1].far + t * (roc[i].far - roc[i - 1].far);
  }
  return roc.back().far;
}

double eer(const ScoreSet& s) { return eer_from_roc(roc_curve(s)); }

DistributionSummary summarize(std::span<const double> scores) {
  DistributionSummary d;
  d.count = scores.size();
  if (scores.empty()) return d;
  d.mean = mean_of(scores);
  d.stddev = scores.size() > 1 ? std::sqrt(sample_variance(scores, d.mean)) : 0.0;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  d.min = *lo;
  d.max = *hi;
  return d;
}

VerificationReport build_report(const ScoreSet& s, std::string matcher_id, Variant variant) {
  if (s.genuine.empty() || s.impostor.empty())
    throw InvalidArgument("report for '" + matcher_id + "' needs both genuine and impostor scores");
  VerificationReport r;
  r.matcher_id = std::move(matcher_id);
  r.variant = variant;
  r.auc = auc(s);
  r.roc = roc_curve(s);
  r.eer = eer_from_roc(r.roc);
  r.genuine = summarize(s.genuine);
  r.impostor = summarize(s.impostor);
  if (s.genuine.size() < 2 || s.impostor.size() < 2) {
    r.decidability_state = DecidabilityState::undefined;
  } else {
    try {
      r.decidability = decidability(s);
    } catch (const DegenerateDistributionError&) {
      r.decidability_state =
          r.genuine.mean == r.impostor.mean ? DecidabilityState::undefined : DecidabilityState::infinite;
    }
  }
  return r;
}

VerificationReport build_report(std::span<const ScoreRecord> records, const std::string& matcher_id,
                                Variant variant) {
  ScoreSet s;
  for (const auto& rec : records) {
    double v;
    if (matcher_id == "fused") {
      if (!rec.fused_score) throw InvalidArgument("record (" + rec.sample_id_a + ", " + rec.sample_id_b + ") is not fused");
      v = *rec.fused_score;
    } else {
      auto it = rec.matcher_scores.find(matcher_id);
      if (it == rec.matcher_scores.end())
        throw InvalidArgument("record (" + rec.sample_id_a + ", " + rec.sample_id_b + ") has no '" + matcher_id +
                              "' score");
      v = it->second;
    }
    (rec.label == PairLabel::genuine ? s.genuine : s.impostor).push_back(v);
  }
  return build_report(s, matcher_id, variant);
}

ScoreSet score_set(const ScoreTable& table, const std::string& matcher_id) {
  const std::vector<double>& col = matcher_id == "fused" ? table.fused : table.column(matcher_id);
  if (col.size() != table.pairs.pairs.size()) throw InvalidArgument("no '" + matcher_id + "' scores in table");
  ScoreSet s;
  for (std::size_t i = 0; i < col.size(); ++i)
    (table.pairs.pairs[i].label == PairLabel::genuine ? s.genuine : s.impostor).push_back(col[i]);
  return s;
}

std::string format_auc_percent(double value) {
  const double tenths = std::floor(value * 1000.0 + 0.5 + 1e-9);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", tenths / 10.0);
  return buf;
}

}  // namespace periocular
