#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "periocular/error.hpp"
#include "periocular/matching.hpp"

namespace periocular {

FusionConfig FusionConfig::uniform(std::vector<std::string> matcher_ids) {
  if (matcher_ids.empty()) throw InvalidArgument("fusion needs at least one matcher");
  const double w = 1.0 / static_cast<double>(matcher_ids.size());
  std::vector<double> weights(matcher_ids.size(), w);
  return {std::move(matcher_ids), std::move(weights)};
}

void FusionConfig::validate() const {
  if (matcher_ids.empty()) throw InvalidArgument("fusion needs at least one matcher");
  if (matcher_ids.size() != weights.size())
    throw InvalidArgument("fusion has " + std::to_string(matcher_ids.size()) + " matchers but " +
                          std::to_string(weights.size()) + " weights");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("fusion weights must be non-negative");
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("fusion weights must sum to 1");
  std::set<std::string> unique(matcher_ids.begin(), matcher_ids.end());
  if (unique.size() != matcher_ids.size()) throw InvalidArgument("duplicate matcher in fusion config");
}

std::vector<double> minmax_normalize(std::span<const double> scores) {
  if (scores.size() < 2) throw InvalidArgument("min-max normalisation needs at least 2 scores");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out(scores.size());
  if (range == 0.0) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = std::clamp((scores[i] - min) / range, 0.0, 1.0);
  return out;
}

const std::vector<double>& ScoreTable::column(std::string_view matcher_id) const {
  for (std::size_t i = 0; i < matcher_ids.size(); ++i)
    if (matcher_ids[i] == matcher_id) return columns[i];
  throw InvalidArgument("no scores for matcher '" + std::string(matcher_id) + "'");
}

std::vector<double> fuse_columns(const ScoreTable& table, const FusionConfig& cfg) {
  cfg.validate();
  std::vector<double> fused(table.pairs.pairs.size(), 0.0);
  for (std::size_t m = 0; m < cfg.matcher_ids.size(); ++m) {
    const auto normalized = minmax_normalize(table.column(cfg.matcher_ids[m]));
    for (std::size_t i = 0; i < fused.size(); ++i) fused[i] += cfg.weights[m] * normalized[i];
  }
  for (auto& v : fused) v = std::clamp(v, 0.0, 1.0);
  return fused;
}

std::vector<ScoreRecord> ScoreTable::to_records() const {
  std::vector<ScoreRecord> out;
  out.reserve(pairs.pairs.size());
  for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
    const auto& p = pairs.pairs[i];
    ScoreRecord r{pairs.id_a(p), pairs.id_b(p), p.label, {}, std::nullopt};
    for (std::size_t m = 0; m < matcher_ids.size(); ++m) r.matcher_scores[matcher_ids[m]] = columns[m][i];
    if (!fused.empty()) r.fused_score = fused[i];
    out.push_back(std::move(r));
  }
  return out;
}

ScoreTable ScoreTable::from_records(std::span<const ScoreRecord> records) {
  ScoreTable t;
  std::map<std::string, std::uint32_t> index;
  std::set<std::string> matchers;
  for (const auto& r : records) {
    index.emplace(r.sample_id_a, 0);
    index.emplace(r.sample_id_b, 0);
    for (const auto& [id, score] : r.matcher_scores) matchers.insert(id);
  }
  for (auto& [id, idx] : index) {
    idx = static_cast<std::uint32_t>(t.pairs.sample_ids.size());
    t.pairs.sample_ids.push_back(id);
  }
  t.matcher_ids.assign(matchers.begin(), matchers.end());
  t.columns.assign(t.matcher_ids.size(), std::vector<double>(records.size()));
  bool all_fused = !records.empty();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    t.pairs.pairs.push_back({index.at(r.sample_id_a), index.at(r.sample_id_b), r.label});
    for (std::size_t m = 0; m < t.matcher_ids.size(); ++m) {
      auto it = r.matcher_scores.find(t.matcher_ids[m]);
      t.columns[m][i] = it == r.matcher_scores.end() ? std::nan("") : it->second;
    }
    all_fused = all_fused && r.fused_score.has_value();
  }
  if (all_fused) {
    t.fused.reserve(records.size());
    for (const auto& r : records) t.fused.push_back(*r.fused_score);
  }
  return t;
}

std::vector<ScoreRecord> fuse_scores(std::vector<ScoreRecord> records, const FusionConfig& cfg) {
  cfg.validate();
  for (const auto& r : records) {
    for (const auto& id : cfg.matcher_ids) {
      auto it = r.matcher_scores.find(id);
      if (it == r.matcher_scores.end())
        throw InvalidArgument("record (" + r.sample_id_a + ", " + r.sample_id_b + ") has no '" + id + "' score");
      if (!std::isfinite(it->second))
        throw InvalidArgument("record (" + r.sample_id_a + ", " + r.sample_id_b + ") has a non-finite '" + id +
                              "' score");
    }
  }
  std::vector<double> fused(records.size(), 0.0);
  std::vector<double> column(records.size());
  for (std::size_t m = 0; m < cfg.matcher_ids.size(); ++m) {
    for (std::size_t i = 0; i < records.size(); ++i) column[i] = records[i].matcher_scores.at(cfg.matcher_ids[m]);
    const auto normalized = minmax_normalize(column);
    for (std::size_t i = 0; i < records.size(); ++i) fused[i] += cfg.weights[m] * normalized[i];
  }
  for (std::size_t i = 0; i < records.size(); ++i) records[i].fused_score = std::clamp(fused[i], 0.0, 1.0);
  return records;
}

}  // namespace periocular
