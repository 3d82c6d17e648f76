#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "periocular/data.hpp"
#include "periocular/features.hpp"

namespace periocular {

/// One labeled comparison. Scores are similarities: higher means more likely genuine.
struct ScoreRecord {
  std::string sample_id_a;
  std::string sample_id_b;
  PairLabel label = PairLabel::impostor;
  std::map<std::string, double> matcher_scores;
  std::optional<double> fused_score;

  bool operator==(const ScoreRecord&) const = default;
};

struct FusionConfig {
  std::vector<std::string> matcher_ids;
  std::vector<double> weights;

  /// Uniform weights over the given matchers.
  static FusionConfig uniform(std::vector<std::string> matcher_ids);
  /// Throws InvalidArgument unless lengths match, weights are non-negative and sum to 1.
  void validate() const;
};

/// <a,b> / (|a| |b|). Throws on dimension mismatch or zero-norm input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// Also requires both vectors to come from the same extractor.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

inline constexpr double kDefaultRatio = 0.75;

/// Fraction of keypoints of `a` whose nearest neighbour in `b` passes Lowe's
/// ratio test, over min(|a|, |b|), clamped to [0, 1]. Zero if either set is empty.
double sift_match_score(const KeypointSet& a, const KeypointSet& b, double ratio = kDefaultRatio);
/// Average of both directions.
double sift_match_score_symmetric(const KeypointSet& a, const KeypointSet& b, double ratio = kDefaultRatio);

/// Maps min to 0 and max to 1; a constant list maps to 0.5. Needs >= 2 scores.
std::vector<double> minmax_normalize(std::span<const double> scores);

/// Min-max normalises each matcher column over all records and stores the
/// weighted sum as fused_score. Order is preserved.
std::vector<ScoreRecord> fuse_scores(std::vector<ScoreRecord> records, const FusionConfig& cfg);

/// Column-oriented scores over a pair list; the form the pipeline works with.
struct ScoreTable {
  PairList pairs;
  std::vector<std::string> matcher_ids;
  std::vector<std::vector<double>> columns;  // [matcher][pair]
  std::vector<double> fused;                 // empty until fused

  const std::vector<double>& column(std::string_view matcher_id) const;
  std::vector<ScoreRecord> to_records() const;
  static ScoreTable from_records(std::span<const ScoreRecord> records);
};

/// Fused column of a table: sum of weight * minmax(column).
std::vector<double> fuse_columns(const ScoreTable& table, const FusionConfig& cfg);

// Long format: sample_id_a,sample_id_b,label,matcher_id,score
void write_scores_long(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable read_scores_long(const std::filesystem::path& path);
// sample_id_a,sample_id_b,label,fused_score
void write_fused(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable read_fused(const std::filesystem::path& path);

}  // namespace periocular
