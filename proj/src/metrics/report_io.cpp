#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "periocular/metrics.hpp"
#include "util/csv.hpp"

namespace periocular {

namespace {

using ojson = nlohmann::ordered_json;

std::string_view state_name(DecidabilityState s) {
  switch (s) {
    case DecidabilityState::finite: return "finite";
    case DecidabilityState::infinite: return "infinite";
    case DecidabilityState::undefined: return "undefined";
  }
  return "undefined";
}

DecidabilityState parse_state(const std::string& s) {
  if (s == "finite") return DecidabilityState::finite;
  if (s == "infinite") return DecidabilityState::infinite;
  if (s == "undefined") return DecidabilityState::undefined;
  throw FormatError("unknown decidability state '" + s + "'");
}

ojson summary_json(const DistributionSummary& d) {
  return ojson{{"count", d.count}, {"mean", d.mean}, {"stddev", d.stddev}, {"min", d.min}, {"max", d.max}};
}

DistributionSummary parse_summary(const ojson& j) {
  return {j.at("count").get<std::size_t>(), j.at("mean").get<double>(), j.at("stddev").get<double>(),
          j.at("min").get<double>(), j.at("max").get<double>()};
}

ojson to_ojson(const VerificationReport& r, bool include_roc) {
  ojson j;
  j["matcher_id"] = r.matcher_id;
  j["variant"] = std::string(to_string(r.variant));
  j["auc"] = r.auc;
  j["auc_percent"] = format_auc_percent(r.auc);
  j["decidability"] = r.decidability_state == DecidabilityState::finite ? ojson(r.decidability) : ojson(nullptr);
  j["decidability_state"] = std::string(state_name(r.decidability_state));
  j["eer"] = r.eer;
  j["counts"] = ojson{{"genuine", r.genuine.count}, {"impostor", r.impostor.count}};
  j["genuine"] = summary_json(r.genuine);
  j["impostor"] = summary_json(r.impostor);
  if (include_roc) {
    ojson roc = ojson::array();
    for (const auto& p : r.roc)
      roc.push_back(ojson::array({std::isinf(p.threshold) ? ojson(nullptr) : ojson(p.threshold), p.far, p.tar}));
    j["roc"] = std::move(roc);
  }
  return j;
}

std::string fmt(double v, int precision) {
  std::ostringstream os;
  os.precision(precision);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

std::string report_to_json(const VerificationReport& r, bool include_roc) {
  return to_ojson(r, include_roc).dump(2);
}

void write_report_json(const VerificationReport& r, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << report_to_json(r) << '\n';
}

VerificationReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open report " + path.string());
  try {
    const ojson j = ojson::parse(in);
    VerificationReport r;
    r.matcher_id = j.at("matcher_id").get<std::string>();
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.auc = j.at("auc").get<double>();
    r.decidability_state = parse_state(j.at("decidability_state").get<std::string>());
    if (r.decidability_state == DecidabilityState::finite) r.decidability = j.at("decidability").get<double>();
    r.eer = j.at("eer").get<double>();
    r.genuine = parse_summary(j.at("genuine"));
    r.impostor = parse_summary(j.at("impostor"));
    if (j.contains("roc")) {
      for (const auto& p : j.at("roc")) {
        const double t = p.at(0).is_null() ? std::numeric_limits<double>::infinity() : p.at(0).get<double>();
        r.roc.push_back({t, p.at(1).get<double>(), p.at(2).get<double>()});
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.filename().string() + ": " + e.what());
  }
}

void write_roc_csv(const VerificationReport& r, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "threshold,far,tar\n";
  for (const auto& p : r.roc)
    out << (std::isinf(p.threshold) ? std::string("inf") : csv::format_double(p.threshold)) << ','
        << csv::format_double(p.far) << ',' << csv::format_double(p.tar) << '\n';
}

void write_report_svg(const VerificationReport& r, const ScoreSet& s, const std::filesystem::path& path) {
  constexpr int kPanel = 320, kPad = 40, kBins = 40;
  constexpr std::size_t kMaxRocPoints = 2000;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kPanel + 3 * kPad << "\" height=\""
      << kPanel + 2 * kPad << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // ROC panel
  const int x0 = kPad, y0 = kPad;
  svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << kPanel << "\" height=\"" << kPanel
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 + kPanel << "\" x2=\"" << x0 + kPanel << "\" y2=\"" << y0
      << "\" stroke=\"#bbb\" stroke-dasharray=\"4\"/>\n";
  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  const std::size_t stride = std::max<std::size_t>(1, r.roc.size() / kMaxRocPoints);
  for (std::size_t i = 0; i < r.roc.size(); i += stride)
    svg << fmt(x0 + r.roc[i].far * kPanel, 2) << ',' << fmt(y0 + (1 - r.roc[i].tar) * kPanel, 2) << ' ';
  if (!r.roc.empty())
    svg << fmt(x0 + r.roc.back().far * kPanel, 2) << ',' << fmt(y0 + (1 - r.roc.back().tar) * kPanel, 2);
  svg << "\"/>\n";
  svg << "<text x=\"" << x0 << "\" y=\"" << y0 - 8 << "\">ROC " << r.matcher_id << " ("
      << to_string(r.variant) << ") AUC " << format_auc_percent(r.auc) << "%</text>\n";
  svg << "<text x=\"" << x0 + kPanel / 2 << "\" y=\"" << y0 + kPanel + 25 << "\">FAR</text>\n";
  svg << "<text x=\"" << x0 - 30 << "\" y=\"" << y0 + kPanel / 2 << "\">TAR</text>\n";

  // histogram panel
  const int hx = 2 * kPad + kPanel;
  svg << "<rect x=\"" << hx << "\" y=\"" << y0 << "\" width=\"" << kPanel << "\" height=\"" << kPanel
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* v : {&s.genuine, &s.impostor})
    for (double x : *v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (hi <= lo) hi = lo + 1.0;
  auto histogram = [&](const std::vector<double>& v) {
    std::vector<double> h(kBins, 0.0);
    for (double x : v) {
      int b = static_cast<int>((x - lo) / (hi - lo) * kBins);
      h[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))] += 1.0;
    }
    for (auto& c : h) c /= std::max<std::size_t>(1, v.size());
    return h;
  };
  const auto hg = histogram(s.genuine), hi_ = histogram(s.impostor);
  const double peak = std::max(*std::max_element(hg.begin(), hg.end()), *std::max_element(hi_.begin(), hi_.end()));
  auto steps = [&](const std::vector<double>& h, const char* color) {
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (int b = 0; b < kBins; ++b) {
      const double y = y0 + kPanel - (peak > 0 ? h[static_cast<std::size_t>(b)] / peak : 0.0) * kPanel;
      svg << fmt(hx + static_cast<double>(b) / kBins * kPanel, 2) << ',' << fmt(y, 2) << ' '
          << fmt(hx + static_cast<double>(b + 1) / kBins * kPanel, 2) << ',' << fmt(y, 2) << ' ';
    }
    svg << "\"/>\n";
  };
  steps(hg, "#2ca02c");
  steps(hi_, "#d62728");
  svg << "<text x=\"" << hx << "\" y=\"" << y0 - 8 << "\">scores: genuine (green) / impostor (red)</text>\n";
  svg << "<text x=\"" << hx << "\" y=\"" << y0 + kPanel + 25 << "\">" << fmt(lo, 3) << "</text>\n";
  svg << "<text x=\"" << hx + kPanel - 30 << "\" y=\"" << y0 + kPanel + 25 << "\">" << fmt(hi, 3) << "</text>\n";
  svg << "</svg>\n";

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << svg.str();
}

}  // namespace periocular
