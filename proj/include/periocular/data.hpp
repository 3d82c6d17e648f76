#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "periocular/error.hpp"

namespace periocular {

enum class EyeSide { left, right };
enum class Gaze { frontal, left, right, up, unknown };
enum class Variant { original, normalized };
enum class Attribute { eyeglasses, gaze };
enum class PairLabel : std::uint8_t { genuine, impostor };
enum class SubjectOrdering { lexicographic, manifest_order };

std::string_view to_string(EyeSide v);
std::string_view to_string(Gaze v);
std::string_view to_string(Variant v);
std::string_view to_string(Attribute v);
std::string_view to_string(PairLabel v);
std::string_view to_string(SubjectOrdering v);

// Parsers throw FormatError on unknown names.
EyeSide parse_eye_side(std::string_view s);
Gaze parse_gaze(std::string_view s);
Variant parse_variant(std::string_view s);
Attribute parse_attribute(std::string_view s);
PairLabel parse_pair_label(std::string_view s);
SubjectOrdering parse_subject_ordering(std::string_view s);

/// Axis-aligned rectangle in pixel coordinates.
struct Rect {
  double x = 0, y = 0, w = 0, h = 0;

  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  bool operator==(const Rect&) const = default;
};

/// One labeled periocular image. A class is one eye of one subject.
struct SampleRecord {
  std::string sample_id;
  std::string subject_id;
  EyeSide eye = EyeSide::left;
  int session = 1;
  bool eyeglasses = false;
  Gaze gaze = Gaze::unknown;
  std::filesystem::path image_path;
  Variant variant = Variant::original;
  std::optional<Rect> iris_box;

  std::string class_id() const;
  bool operator==(const SampleRecord&) const = default;
};

struct Manifest {
  std::string dataset_name;
  std::vector<SampleRecord> samples;
  Attribute attribute_of_interest = Attribute::eyeglasses;

  const SampleRecord* find(std::string_view sample_id, Variant variant) const;
  /// Subjects in first-appearance order.
  std::vector<std::string> subjects() const;
};

struct ManifestOptions {
  Attribute attribute = Attribute::eyeglasses;
  /// Relative image paths are resolved against the manifest's directory.
  bool check_paths = true;
};

/// Parses and validates a manifest CSV. Errors name the offending row.
Manifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

/// Checks the manifest invariants on an in-memory manifest.
void validate_manifest(const Manifest& m, bool check_paths);

/// Writes the manifest CSV with absolute image paths.
void write_manifest(const Manifest& m, const std::filesystem::path& path);

/// Records of a single variant, order preserved.
Manifest select_variant(const Manifest& m, Variant variant);

struct SubjectSplit {
  Manifest train;
  Manifest eval;
};

/// Partitions subjects; the first ceil(fraction * S) go to train.
SubjectSplit split_subjects(const Manifest& m, double fraction,
                            SubjectOrdering ordering = SubjectOrdering::lexicographic);

struct ProtocolDescriptor {
  bool attribute_differing_only = false;
  Attribute attribute = Attribute::eyeglasses;
  Variant variant = Variant::original;
};

/// Indices refer into PairList::sample_ids, which is sorted, so a < b implies
/// sample_ids[a] < sample_ids[b].
struct Pair {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  PairLabel label = PairLabel::impostor;

  bool operator==(const Pair&) const = default;
};

struct PairList {
  std::vector<std::string> sample_ids;
  std::vector<Pair> pairs;
  ProtocolDescriptor protocol;

  const std::string& id_a(const Pair& p) const { return sample_ids[p.a]; }
  const std::string& id_b(const Pair& p) const { return sample_ids[p.b]; }
  std::size_t count(PairLabel label) const;
};

/// All-against-all comparisons over a single-variant manifest.
PairList generate_pairs(const Manifest& m, bool attribute_differing_only);

/// True when the two samples differ in the manifest's attribute of interest.
/// Gaze pairs involving "unknown" never count as differing.
bool attributes_differ(const SampleRecord& a, const SampleRecord& b, Attribute attribute);

void write_pair_list(const PairList& pairs, const std::filesystem::path& path);
PairList read_pair_list(const std::filesystem::path& path);

}  // namespace periocular
