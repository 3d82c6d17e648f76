#include <algorithm>
#include <cmath>
#include <limits>

#include "periocular/error.hpp"
#include "periocular/matching.hpp"

namespace periocular {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InvalidArgument("cosine similarity of vectors with " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()) + " dims");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine similarity of a zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.extractor_id != b.extractor_id)
    throw InvalidArgument("cannot compare '" + a.extractor_id + "' with '" + b.extractor_id + "' features");
  return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

namespace {

float squared_distance(const std::array<float, 128>& a, const std::array<float, 128>& b) {
  float acc[8] = {};
  for (std::size_t i = 0; i < 128; i += 8)
    for (std::size_t k = 0; k < 8; ++k) {
      const float d = a[i + k] - b[i + k];
      acc[k] += d * d;
    }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace

double sift_match_score(const KeypointSet& a, const KeypointSet& b, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("ratio must lie in (0, 1)");
  if (a.empty() || b.empty()) return 0.0;
  const double ratio_sq = ratio * ratio;
  std::size_t matches = 0;
  for (const auto& ka : a.keypoints) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (const auto& kb : b.keypoints) {
      const double d = squared_distance(ka.descriptor, kb.descriptor);
      if (d < best) {
        second = best;
        best = d;
      } else if (d < second) {
        second = d;
      }
    }
    // a lone candidate has no runner-up and is accepted
    if (best < ratio_sq * second) ++matches;
  }
  const double denom = static_cast<double>(std::min(a.size(), b.size()));
  return std::clamp(static_cast<double>(matches) / denom, 0.0, 1.0);
}

double sift_match_score_symmetric(const KeypointSet& a, const KeypointSet& b, double ratio) {
  return 0.5 * (sift_match_score(a, b, ratio) + sift_match_score(b, a, ratio));
}

}  // namespace periocular
