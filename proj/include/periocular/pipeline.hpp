#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "periocular/data.hpp"
#include "periocular/features.hpp"
#include "periocular/imaging.hpp"
#include "periocular/matching.hpp"
#include "periocular/metrics.hpp"

namespace periocular {

/// Matcher combinations evaluated as one method each.
enum class Preset { park, ahmed, proposed_fusion, deep };

std::string_view to_string(Preset p);
Preset parse_preset(std::string_view s);
/// Matcher ids of a preset: "lbp", "lpq", "hog", "sift", "mbtlbp", "deep".
std::vector<std::string> preset_matchers(Preset p);

enum class VariantSelection { original, normalized, both };
std::string_view to_string(VariantSelection v);
VariantSelection parse_variant_selection(std::string_view s);

// ---------------------------------------------------------------------------
// External attribute normaliser

/// Template value selecting the built-in byte-copy normaliser.
inline constexpr std::string_view kIdentityNormalizer = "identity";

/// Stages the manifest's images into `<work_dir>/in`, runs the command once
/// with {in_dir} and {out_dir} substituted, and expects every staged file name
/// to reappear non-empty in `<work_dir>/out`. Returns the mirrored manifest
/// with variant = normalized.
Manifest normalize_batch(const Manifest& m, const std::string& command_template,
                         const std::filesystem::path& work_dir);

// ---------------------------------------------------------------------------
// Feature extraction and caching

struct FeatureOptions {
  AlignmentParams alignment{};
  IntensityMode intensity = IntensityMode::max_channel;
  int patch_rows = 4;
  int patch_cols = 4;
  LbpParams lbp{};
  LpqParams lpq{};
  HogParams hog{};
  SiftParams sift{};
  MbtlbpParams mbtlbp{};
  /// Deep preset: embeddings live at <embedding_dir>/<variant>/<sample_id>.pemb
  std::filesystem::path embedding_dir;
  int workers = 0;  // 0 = hardware concurrency

  /// Extractor id used for a matcher under these options.
  std::string extractor_id(const std::string& matcher_id) const;
};

struct SampleFeatures {
  std::map<std::string, FeatureVector> dense;  // keyed by matcher id
  std::optional<KeypointSet> keypoints;
};

using FeatureMap = std::map<std::string, SampleFeatures>;  // keyed by sample id

struct ExtractionStats {
  std::size_t computed = 0;
  std::size_t cache_hits = 0;
  std::size_t corrupt_recomputed = 0;
  std::map<std::string, std::size_t> computed_by_matcher;
};

/// Content-addressed on-disk feature store. Entries carry their key and a
/// payload checksum; damaged entries read as misses.
class FeatureCache {
 public:
  enum class Lookup { hit, miss, corrupt };

  explicit FeatureCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path entry_path(const std::string& sample_id, const std::string& extractor_id,
                                   const std::string& key) const;

  Lookup load(const std::string& sample_id, const std::string& extractor_id, const std::string& key,
              FeatureVector& out) const;
  Lookup load(const std::string& sample_id, const std::string& extractor_id, const std::string& key,
              KeypointSet& out) const;
  void store(const std::string& sample_id, const std::string& extractor_id, const std::string& key,
             const FeatureVector& value) const;
  void store(const std::string& sample_id, const std::string& extractor_id, const std::string& key,
             const KeypointSet& value) const;

 private:
  std::filesystem::path dir_;
};

/// Loads a sample's image as the extractors see it: aligned and cropped when
/// both iris boxes of the source image are known, otherwise resized to the
/// output size.
GrayImage prepare_sample_image(const SampleRecord& record, const Manifest& m, const FeatureOptions& options);

/// Runs the preset's extractors for every sample, reusing cached features.
/// An empty cache_dir disables caching.
FeatureMap extract_all(const Manifest& m, Preset preset, const std::filesystem::path& cache_dir,
                       const FeatureOptions& options = {}, ExtractionStats* stats = nullptr);

struct MatchOptions {
  double sift_ratio = kDefaultRatio;
  bool sift_symmetric = false;
  int workers = 0;
};

/// Scores every pair with every matcher of the preset. Cosine comparisons
/// involving an all-zero vector score 0.
ScoreTable score_pairs(const PairList& pairs, const FeatureMap& features, Preset preset,
                       const MatchOptions& options = {});

// ---------------------------------------------------------------------------
// Comparison of original vs normalised results

struct MetricDelta {
  std::optional<double> before;
  std::optional<double> after;
  std::optional<double> absolute;  // after - before
  std::optional<double> relative;  // after / before - 1
  /// Relative change in whole percent, truncated toward zero.
  std::optional<long> percent;
};

struct ReportComparison {
  std::string matcher_id;
  MetricDelta decidability;
  MetricDelta auc;
};

MetricDelta metric_delta(std::optional<double> before, std::optional<double> after);
ReportComparison compare_reports(const VerificationReport& before, const VerificationReport& after);

/// Mean and sample standard deviation over repeated runs of one method.
struct RunAggregate {
  std::string matcher_id;
  Variant variant = Variant::original;
  std::size_t runs = 0;
  double auc_mean = 0, auc_stddev = 0;
  std::optional<double> decidability_mean;
  double decidability_stddev = 0;
};

RunAggregate aggregate_reports(std::span<const VerificationReport> reports);
/// Compares the means of two sets of repeated runs.
ReportComparison compare_report_sets(std::span<const VerificationReport> before,
                                     std::span<const VerificationReport> after);

std::string comparison_to_json(std::span<const ReportComparison> comparisons);

// ---------------------------------------------------------------------------
// Experiment runner

struct ExperimentConfig {
  std::filesystem::path manifest_path;
  VariantSelection variant_under_test = VariantSelection::both;
  std::optional<std::string> normalizer_command;
  Preset preset = Preset::proposed_fusion;
  std::vector<double> fusion_weights;  // empty = uniform over the preset's matchers
  Attribute attribute = Attribute::eyeglasses;
  bool attribute_differing_only = true;
  std::optional<double> split_fraction = 0.5;
  SubjectOrdering split_ordering = SubjectOrdering::lexicographic;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  FeatureOptions features{};
  MatchOptions matching{};

  /// Paths in the document are resolved against `base_dir`.
  static ExperimentConfig from_json(const std::string& text, const std::filesystem::path& base_dir);
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json() const;
};

struct RunArtifacts {
  std::filesystem::path output_dir;
  std::filesystem::path pair_list;
  std::map<Variant, std::filesystem::path> score_files;
  std::map<Variant, std::filesystem::path> fused_files;
  std::map<std::pair<std::string, Variant>, VerificationReport> reports;
  std::map<std::pair<std::string, Variant>, std::filesystem::path> report_files;
  std::vector<ReportComparison> comparisons;
  std::filesystem::path comparison_file;
  std::filesystem::path summary_file;
  std::map<Variant, ExtractionStats> extraction;
  PairList pairs;
};

/// split -> (normalise) -> extract -> pairs -> match -> fuse -> report.
/// Stage failures are rethrown as StageError.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

/// Plain-text table of AUC (%) and decidability per method and variant.
std::string format_summary_table(const RunArtifacts& artifacts);

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticSpec {
  int subjects = 5;          // each subject contributes a left and a right eye class
  int images_per_class = 6;
  int size = 256;
  double noise_sigma = 0.05;
  int constant_classes = 0;  // trailing classes rendered as flat grey images
  std::uint64_t seed = 7;
};

/// Writes PNG images plus manifest.csv under `dir`; returns the manifest path.
/// Genuine samples are one texture plus independent Gaussian noise;
/// eyeglasses flags alternate within a class.
std::filesystem::path make_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec);

}  // namespace periocular
