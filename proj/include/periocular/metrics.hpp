#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "periocular/data.hpp"
#include "periocular/error.hpp"
#include "periocular/matching.hpp"

namespace periocular {

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

/// Zero pooled variance: the two distributions are infinitely separated (or
/// identical point masses) and d' is undefined.
class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

/// d' = |mu_G - mu_I| / sqrt((var_G + var_I) / 2) with sample variances.
double decidability(const ScoreSet& s);

/// Mann-Whitney estimate of P(genuine > impostor), ties counted as 1/2. O(n log n).
double auc(const ScoreSet& s);

struct RocPoint {
  double threshold = 0;  // accept when score >= threshold
  double far = 0;
  double tar = 0;

  bool operator==(const RocPoint&) const = default;
};

/// Operating points from (0,0) at +inf down to (1,1), one per distinct score.
std::vector<RocPoint> roc_curve(const ScoreSet& s);

/// Trapezoidal area under a curve of (far, tar) points.
double roc_area(std::span<const RocPoint> roc);

/// Equal error rate, linearly interpolated between adjacent ROC points.
double eer(const ScoreSet& s);
double eer_from_roc(std::span<const RocPoint> roc);

enum class DecidabilityState { finite, infinite, undefined };

struct DistributionSummary {
  std::size_t count = 0;
  double mean = 0;
  double stddev = 0;  // sample (n - 1)
  double min = 0;
  double max = 0;
};

DistributionSummary summarize(std::span<const double> scores);

struct VerificationReport {
  std::string matcher_id;
  Variant variant = Variant::original;
  double auc = 0;
  double decidability = 0;  // meaningful only when state == finite
  DecidabilityState decidability_state = DecidabilityState::finite;
  double eer = 0;
  std::vector<RocPoint> roc;
  DistributionSummary genuine;
  DistributionSummary impostor;

  std::size_t n_genuine() const { return genuine.count; }
  std::size_t n_impostor() const { return impostor.count; }
};

VerificationReport build_report(const ScoreSet& s, std::string matcher_id, Variant variant);
/// Uses the matcher's score column, or the fused score when matcher_id == "fused".
VerificationReport build_report(std::span<const ScoreRecord> records, const std::string& matcher_id,
                                Variant variant);
ScoreSet score_set(const ScoreTable& table, const std::string& matcher_id);

/// AUC as a percentage with one decimal, rounded half-up (display only).
std::string format_auc_percent(double auc);

void write_report_json(const VerificationReport& r, const std::filesystem::path& path);
VerificationReport read_report_json(const std::filesystem::path& path);
std::string report_to_json(const VerificationReport& r, bool include_roc = true);
void write_roc_csv(const VerificationReport& r, const std::filesystem::path& path);
/// Two-panel SVG: ROC curve and overlaid score histograms.
void write_report_svg(const VerificationReport& r, const ScoreSet& s, const std::filesystem::path& path);

}  // namespace periocular
