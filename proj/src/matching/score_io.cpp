#include <cmath>
#include <fstream>
#include <map>

#include "periocular/error.hpp"
#include "periocular/matching.hpp"
#include "util/csv.hpp"

namespace periocular {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

// Builds the pair index for a table whose rows arrive in file order.
struct PairCollector {
  std::vector<std::pair<std::string, std::string>> order;
  std::vector<PairLabel> labels;
  std::map<std::pair<std::string, std::string>, std::size_t> lookup;

  std::size_t add(const std::string& a, const std::string& b, PairLabel label, const std::string& where) {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto [it, inserted] = lookup.emplace(key, order.size());
    if (inserted) {
      order.push_back(key);
      labels.push_back(label);
    } else if (labels[it->second] != label) {
      throw FormatError(where + ": conflicting labels for (" + a + ", " + b + ")");
    }
    return it->second;
  }

  PairList build() const {
    PairList out;
    std::map<std::string, std::uint32_t> index;
    for (const auto& [a, b] : order) {
      index.emplace(a, 0);
      index.emplace(b, 0);
    }
    for (auto& [id, idx] : index) {
      idx = static_cast<std::uint32_t>(out.sample_ids.size());
      out.sample_ids.push_back(id);
    }
    for (std::size_t i = 0; i < order.size(); ++i)
      out.pairs.push_back({index.at(order[i].first), index.at(order[i].second), labels[i]});
    return out;
  }
};

}  // namespace

void write_scores_long(const ScoreTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "sample_id_a,sample_id_b,label,matcher_id,score\n";
  for (std::size_t i = 0; i < table.pairs.pairs.size(); ++i) {
    const auto& p = table.pairs.pairs[i];
    for (std::size_t m = 0; m < table.matcher_ids.size(); ++m)
      out << table.pairs.id_a(p) << ',' << table.pairs.id_b(p) << ',' << to_string(p.label) << ','
          << table.matcher_ids[m] << ',' << csv::format_double(table.columns[m][i]) << '\n';
  }
}

ScoreTable read_scores_long(const std::filesystem::path& path) {
  auto csvt = csv::read(path);
  if (csvt.header != std::vector<std::string>{"sample_id_a", "sample_id_b", "label", "matcher_id", "score"})
    throw FormatError(path.string() + ": expected header sample_id_a,sample_id_b,label,matcher_id,score");
  PairCollector pairs;
  std::vector<std::string> matchers;
  std::map<std::string, std::size_t> matcher_index;
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  for (std::size_t r = 0; r < csvt.rows.size(); ++r) {
    const auto& row = csvt.rows[r];
    const auto where = path.filename().string() + ":" + std::to_string(csvt.line_numbers[r]);
    if (row.size() != 5) throw FormatError(where + ": expected 5 columns");
    const auto pair = pairs.add(row[0], row[1], parse_pair_label(row[2]), where);
    auto [it, inserted] = matcher_index.emplace(row[3], matchers.size());
    if (inserted) matchers.push_back(row[3]);
    const double score = csv::parse_double(row[4], "score");
    if (!std::isfinite(score)) throw FormatError(where + ": non-finite score");
    cells.emplace_back(pair, it->second, score);
  }
  ScoreTable t;
  t.pairs = pairs.build();
  t.matcher_ids = matchers;
  t.columns.assign(matchers.size(), std::vector<double>(t.pairs.pairs.size(), std::nan("")));
  for (const auto& [pair, matcher, score] : cells) t.columns[matcher][pair] = score;
  for (std::size_t m = 0; m < matchers.size(); ++m)
    for (std::size_t i = 0; i < t.pairs.pairs.size(); ++i)
      if (std::isnan(t.columns[m][i]))
        throw FormatError(path.string() + ": pair (" + t.pairs.id_a(t.pairs.pairs[i]) + ", " +
                          t.pairs.id_b(t.pairs.pairs[i]) + ") lacks a '" + matchers[m] + "' score");
  return t;
}

void write_fused(const ScoreTable& table, const std::filesystem::path& path) {
  if (table.fused.size() != table.pairs.pairs.size()) throw InvalidArgument("score table has not been fused");
  auto out = open_out(path);
  out << "sample_id_a,sample_id_b,label,fused_score\n";
  for (std::size_t i = 0; i < table.pairs.pairs.size(); ++i) {
    const auto& p = table.pairs.pairs[i];
    out << table.pairs.id_a(p) << ',' << table.pairs.id_b(p) << ',' << to_string(p.label) << ','
        << csv::format_double(table.fused[i]) << '\n';
  }
}

ScoreTable read_fused(const std::filesystem::path& path) {
  auto csvt = csv::read(path);
  if (csvt.header != std::vector<std::string>{"sample_id_a", "sample_id_b", "label", "fused_score"})
    throw FormatError(path.string() + ": expected header sample_id_a,sample_id_b,label,fused_score");
  PairCollector pairs;
  std::vector<double> fused;
  for (std::size_t r = 0; r < csvt.rows.size(); ++r) {
    const auto& row = csvt.rows[r];
    const auto where = path.filename().string() + ":" + std::to_string(csvt.line_numbers[r]);
    if (row.size() != 4) throw FormatError(where + ": expected 4 columns");
    const auto before = pairs.order.size();
    pairs.add(row[0], row[1], parse_pair_label(row[2]), where);
    if (pairs.order.size() == before) throw FormatError(where + ": duplicate pair");
    fused.push_back(csv::parse_double(row[3], "fused_score"));
  }
  ScoreTable t;
  t.pairs = pairs.build();
  t.fused = std::move(fused);
  return t;
}

}  // namespace periocular
