#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "periocular/data.hpp"
#include "periocular/error.hpp"
#include "util/csv.hpp"

namespace periocular {

std::size_t PairList::count(PairLabel label) const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [label](const Pair& p) { return p.label == label; }));
}

bool attributes_differ(const SampleRecord& a, const SampleRecord& b, Attribute attribute) {
  switch (attribute) {
    case Attribute::eyeglasses:
      return a.eyeglasses != b.eyeglasses;
    case Attribute::gaze:
      if (a.gaze == Gaze::unknown || b.gaze == Gaze::unknown) return false;
      return a.gaze != b.gaze;
  }
  return false;
}

PairList generate_pairs(const Manifest& m, bool attribute_differing_only) {
  if (m.samples.size() < 2) throw InvalidArgument("pair generation needs at least 2 samples");
  const Variant variant = m.samples.front().variant;
  for (const auto& s : m.samples)
    if (s.variant != variant)
      throw InvalidArgument("pair generation needs a single-variant manifest; use select_variant");

  std::vector<std::size_t> order(m.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return m.samples[x].sample_id < m.samples[y].sample_id;
  });

  PairList out;
  out.protocol = {attribute_differing_only, m.attribute_of_interest, variant};
  out.sample_ids.reserve(order.size());
  std::vector<std::string> classes;
  classes.reserve(order.size());
  for (auto idx : order) {
    out.sample_ids.push_back(m.samples[idx].sample_id);
    classes.push_back(m.samples[idx].class_id());
  }

  const auto n = static_cast<std::uint32_t>(order.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& si = m.samples[order[i]];
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const auto& sj = m.samples[order[j]];
      if (attribute_differing_only && !attributes_differ(si, sj, m.attribute_of_interest)) continue;
      out.pairs.push_back({i, j, classes[i] == classes[j] ? PairLabel::genuine : PairLabel::impostor});
    }
  }
  return out;
}

void write_pair_list(const PairList& pairs, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "sample_id_a,sample_id_b,label\n";
  for (const auto& p : pairs.pairs)
    out << pairs.id_a(p) << ',' << pairs.id_b(p) << ',' << to_string(p.label) << '\n';
}

PairList read_pair_list(const std::filesystem::path& path) {
  auto table = csv::read(path);
  if (table.header != std::vector<std::string>{"sample_id_a", "sample_id_b", "label"})
    throw FormatError(path.string() + ": expected header sample_id_a,sample_id_b,label");

  std::map<std::string, std::uint32_t> index;
  for (const auto& row : table.rows) {
    if (row.size() != 3) continue;
    index.emplace(row[0], 0);
    index.emplace(row[1], 0);
  }
  PairList out;
  for (auto& [id, idx] : index) {
    idx = static_cast<std::uint32_t>(out.sample_ids.size());
    out.sample_ids.push_back(id);
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = path.filename().string() + ":" + std::to_string(table.line_numbers[r]);
    if (row.size() != 3) throw FormatError(where + ": expected 3 columns");
    if (row[0] == row[1]) throw FormatError(where + ": self pair '" + row[0] + "'");
    Pair p{index.at(row[0]), index.at(row[1]), parse_pair_label(row[2])};
    if (p.a > p.b) std::swap(p.a, p.b);
    out.pairs.push_back(p);
  }
  return out;
}

}  // namespace periocular
