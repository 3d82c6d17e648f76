#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include "periocular/data.hpp"
#include "periocular/error.hpp"
#include "util/csv.hpp"

namespace periocular {

namespace {

constexpr std::string_view kManifestHeader =
    "sample_id,subject_id,eye,session,eyeglasses,gaze,image_path,variant,iris_x,iris_y,iris_w,iris_h";

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::pair<std::string_view, Enum>, N>& table,
                std::string_view what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  throw FormatError("invalid " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "?";
}

constexpr std::array<std::pair<std::string_view, EyeSide>, 2> kEyes{{
    {"left", EyeSide::left}, {"right", EyeSide::right}}};
constexpr std::array<std::pair<std::string_view, Gaze>, 5> kGazes{{
    {"frontal", Gaze::frontal}, {"left", Gaze::left}, {"right", Gaze::right},
    {"up", Gaze::up}, {"unknown", Gaze::unknown}}};
constexpr std::array<std::pair<std::string_view, Variant>, 2> kVariants{{
    {"original", Variant::original}, {"normalized", Variant::normalized}}};
constexpr std::array<std::pair<std::string_view, Attribute>, 2> kAttributes{{
    {"eyeglasses", Attribute::eyeglasses}, {"gaze", Attribute::gaze}}};
constexpr std::array<std::pair<std::string_view, PairLabel>, 2> kLabels{{
    {"genuine", PairLabel::genuine}, {"impostor", PairLabel::impostor}}};
constexpr std::array<std::pair<std::string_view, SubjectOrdering>, 2> kOrderings{{
    {"lexicographic", SubjectOrdering::lexicographic},
    {"manifest_order", SubjectOrdering::manifest_order}}};

std::string row_context(const std::filesystem::path& path, std::size_t line, const std::string& id) {
  std::string ctx = path.filename().string() + ":" + std::to_string(line);
  if (!id.empty()) ctx += " (sample '" + id + "')";
  return ctx;
}

SampleRecord parse_row(const std::vector<std::string>& f, const std::filesystem::path& base) {
  SampleRecord r;
  r.sample_id = f[0];
  r.subject_id = f[1];
  if (r.sample_id.empty()) throw FormatError("empty sample_id");
  if (r.subject_id.empty()) throw FormatError("empty subject_id");
  r.eye = parse_eye_side(f[2]);
  long session = csv::parse_long(f[3], "session");
  if (session < 1) throw FormatError("session must be >= 1, got " + f[3]);
  r.session = static_cast<int>(session);
  if (f[4] == "0") {
    r.eyeglasses = false;
  } else if (f[4] == "1") {
    r.eyeglasses = true;
  } else {
    throw FormatError("eyeglasses flag must be 0 or 1, got '" + f[4] + "'");
  }
  r.gaze = parse_gaze(f[5]);
  if (f[6].empty()) throw FormatError("empty image_path");
  std::filesystem::path image(f[6]);
  r.image_path = image.is_absolute() ? image : (base / image).lexically_normal();
  r.variant = parse_variant(f[7]);

  int present = 0;
  for (int i = 8; i < 12; ++i) present += f[i].empty() ? 0 : 1;
  if (present == 4) {
    Rect box{csv::parse_double(f[8], "iris_x"), csv::parse_double(f[9], "iris_y"),
             csv::parse_double(f[10], "iris_w"), csv::parse_double(f[11], "iris_h")};
    if (box.w <= 0 || box.h <= 0) throw FormatError("iris box must have positive size");
    r.iris_box = box;
  } else if (present != 0) {
    throw FormatError("iris box fields must be all present or all empty");
  }
  return r;
}

}  // namespace

std::string_view to_string(EyeSide v) { return enum_name(v, kEyes); }
std::string_view to_string(Gaze v) { return enum_name(v, kGazes); }
std::string_view to_string(Variant v) { return enum_name(v, kVariants); }
std::string_view to_string(Attribute v) { return enum_name(v, kAttributes); }
std::string_view to_string(PairLabel v) { return enum_name(v, kLabels); }
std::string_view to_string(SubjectOrdering v) { return enum_name(v, kOrderings); }

EyeSide parse_eye_side(std::string_view s) { return parse_enum(s, kEyes, "eye"); }
Gaze parse_gaze(std::string_view s) { return parse_enum(s, kGazes, "gaze"); }
Variant parse_variant(std::string_view s) { return parse_enum(s, kVariants, "variant"); }
Attribute parse_attribute(std::string_view s) { return parse_enum(s, kAttributes, "attribute"); }
PairLabel parse_pair_label(std::string_view s) { return parse_enum(s, kLabels, "label"); }
SubjectOrdering parse_subject_ordering(std::string_view s) {
  return parse_enum(s, kOrderings, "subject ordering");
}

std::string SampleRecord::class_id() const {
  return subject_id + "_" + std::string(to_string(eye));
}

const SampleRecord* Manifest::find(std::string_view sample_id, Variant variant) const {
  for (const auto& s : samples)
    if (s.sample_id == sample_id && s.variant == variant) return &s;
  return nullptr;
}

std::vector<std::string> Manifest::subjects() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : samples)
    if (seen.insert(s.subject_id).second) out.push_back(s.subject_id);
  return out;
}

void validate_manifest(const Manifest& m, bool check_paths) {
  if (m.samples.empty()) throw FormatError("manifest '" + m.dataset_name + "' has no samples");
  std::set<std::pair<std::string, Variant>> keys;
  std::set<std::string> originals;
  for (const auto& s : m.samples) {
    if (!keys.emplace(s.sample_id, s.variant).second)
      throw FormatError("duplicate sample_id '" + s.sample_id + "' (" +
                        std::string(to_string(s.variant)) + ")");
    if (s.variant == Variant::original) originals.insert(s.sample_id);
    if (check_paths && !std::filesystem::is_regular_file(s.image_path))
      throw FormatError("sample '" + s.sample_id + "': image not found: " + s.image_path.string());
  }
  for (const auto& s : m.samples) {
    if (s.variant == Variant::normalized && !originals.empty() && !originals.contains(s.sample_id))
      throw FormatError("normalized sample '" + s.sample_id + "' has no original counterpart");
  }
}

Manifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options) {
  if (!std::filesystem::is_regular_file(path))
    throw FormatError("manifest not found: " + path.string());
  auto table = csv::read(path);
  auto expected = csv::split_row(kManifestHeader);
  if (table.header != expected)
    throw FormatError(path.filename().string() + ": unexpected header; expected " +
                      std::string(kManifestHeader));

  Manifest m;
  m.dataset_name = path.stem().string();
  m.attribute_of_interest = options.attribute;
  const auto base = std::filesystem::absolute(path).parent_path();
  std::map<std::pair<std::string, Variant>, std::size_t> seen;

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& fields = table.rows[i];
    const std::size_t line = table.line_numbers[i];
    const std::string id = fields.empty() ? std::string() : fields[0];
    if (fields.size() != expected.size())
      throw FormatError(row_context(path, line, id) + ": expected " +
                        std::to_string(expected.size()) + " columns, got " +
                        std::to_string(fields.size()));
    SampleRecord record;
    try {
      record = parse_row(fields, base);
    } catch (const FormatError& e) {
      throw FormatError(row_context(path, line, id) + ": " + e.what());
    }
    auto [it, inserted] = seen.emplace(std::make_pair(record.sample_id, record.variant), line);
    if (!inserted)
      throw FormatError(row_context(path, line, id) + ": duplicate sample_id '" + id +
                        "' (first seen on line " + std::to_string(it->second) + ")");
    if (options.check_paths && !std::filesystem::is_regular_file(record.image_path))
      throw FormatError(row_context(path, line, id) +
                        ": image not found: " + record.image_path.string());
    m.samples.push_back(std::move(record));
  }
  validate_manifest(m, false);
  return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << kManifestHeader << '\n';
  for (const auto& s : m.samples) {
    out << s.sample_id << ',' << s.subject_id << ',' << to_string(s.eye) << ',' << s.session << ','
        << (s.eyeglasses ? 1 : 0) << ',' << to_string(s.gaze) << ','
        << std::filesystem::absolute(s.image_path).lexically_normal().string() << ','
        << to_string(s.variant);
    if (s.iris_box) {
      out << ',' << csv::format_double(s.iris_box->x) << ',' << csv::format_double(s.iris_box->y)
          << ',' << csv::format_double(s.iris_box->w) << ',' << csv::format_double(s.iris_box->h);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

Manifest select_variant(const Manifest& m, Variant variant) {
  Manifest out{m.dataset_name, {}, m.attribute_of_interest};
  for (const auto& s : m.samples)
    if (s.variant == variant) out.samples.push_back(s);
  return out;
}

SubjectSplit split_subjects(const Manifest& m, double fraction, SubjectOrdering ordering) {
  if (m.samples.empty()) throw InvalidArgument("cannot split an empty manifest");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidArgument("split fraction must lie in (0, 1)");
  auto subjects = m.subjects();
  if (ordering == SubjectOrdering::lexicographic) std::sort(subjects.begin(), subjects.end());
  const auto total = subjects.size();
  // The epsilon keeps products such as 0.7 * 10 from rounding up past the integer.
  const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
  if (n_train == 0 || n_train >= total)
    throw InvalidArgument("split fraction " + csv::format_double(fraction) + " over " +
                          std::to_string(total) + " subjects leaves one side empty");
  std::set<std::string> train_subjects(subjects.begin(), subjects.begin() + static_cast<long>(n_train));

  SubjectSplit split{{m.dataset_name, {}, m.attribute_of_interest},
                     {m.dataset_name, {}, m.attribute_of_interest}};
  for (const auto& s : m.samples)
    (train_subjects.contains(s.subject_id) ? split.train : split.eval).samples.push_back(s);
  return split;
}

}  // namespace periocular
