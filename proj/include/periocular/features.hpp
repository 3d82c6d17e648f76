#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "periocular/error.hpp"
#include "periocular/imaging.hpp"

namespace periocular {

/// Dense descriptor tagged with the extractor that produced it.
struct FeatureVector {
  std::string extractor_id;
  std::vector<double> values;

  std::size_t dims() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

struct Keypoint {
  double x = 0;
  double y = 0;
  double scale = 0;        // sigma in input-image pixels
  double orientation = 0;  // radians
  std::array<float, 128> descriptor{};

  bool operator==(const Keypoint&) const = default;
};

struct KeypointSet {
  std::vector<Keypoint> keypoints;

  std::size_t size() const { return keypoints.size(); }
  bool empty() const { return keypoints.empty(); }
  bool operator==(const KeypointSet&) const = default;
};

// ---------------------------------------------------------------------------
// Uniform LBP

struct LbpParams {
  double radius = 1.0;  // 8 neighbours on a circle, bilinear sampled

  std::string id() const;
};

/// Number of bins of the u2 mapping for 8 neighbours (58 uniform + 1).
inline constexpr int kLbpUniformBins = 59;

/// 256-entry table mapping an 8-bit code to its u2 bin.
const std::array<int, 256>& lbp_uniform_table();

/// Raw 8-bit LBP codes of the interior pixels, row-major.
std::vector<int> lbp_codes(const GrayImage& patch, const LbpParams& params = {});

/// Concatenated per-patch L1-normalised u2 histograms (944 dims for 16 patches).
FeatureVector extract_lbp(const PatchGrid& grid, const LbpParams& params = {});

// ---------------------------------------------------------------------------
// Local phase quantisation

struct LpqParams {
  int window = 7;
  bool decorrelate = false;  // whitening under a rho=0.9 correlation model
  double rho = 0.9;

  std::string id() const;
};

/// 8-bit LPQ codes of every pixel whose window fits inside the patch.
std::vector<int> lpq_codes(const GrayImage& patch, const LpqParams& params = {});

/// Concatenated per-patch 256-bin histograms (4096 dims for 16 patches).
FeatureVector extract_lpq(const PatchGrid& grid, const LpqParams& params = {});

// ---------------------------------------------------------------------------
// HOG

struct HogParams {
  int resize_to = 368;  // 0 keeps the input size
  int cell_size = 8;
  int bins = 9;
  int block_cells = 2;
  double clip = 0.2;

  std::string id() const;
};

/// Descriptor length for a square image of side `side` after resizing.
std::size_t hog_dimension(const HogParams& params, int side);

FeatureVector extract_hog(const GrayImage& img, const HogParams& params = {});

// ---------------------------------------------------------------------------
// SIFT

struct SiftParams {
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double assumed_blur = 0.5;
  double contrast_threshold = 0.03;  // divided by scales_per_octave before use on |D|
  double edge_ratio = 10.0;
  bool double_image = false;
  int max_octaves = 8;

  std::string id() const;
};

KeypointSet extract_sift(const GrayImage& img, const SiftParams& params = {});

// ---------------------------------------------------------------------------
// Multi-block transitional LBP

struct MbtlbpParams {
  int block = 3;
  int region_rows = 4;
  int region_cols = 4;

  std::string id() const;
};

/// Mean-pools `block`x`block` cells (trailing partial cells are dropped).
GrayImage block_average(const GrayImage& img, int block);

/// Transitional codes over the pooled image; (width-2) x (height-2), row-major.
std::vector<int> mbtlbp_codes(const GrayImage& pooled);

/// Per-region 256-bin histograms of the code map (4096 dims for 4x4 regions).
FeatureVector extract_mbtlbp(const GrayImage& img, const MbtlbpParams& params = {});

// ---------------------------------------------------------------------------
// Deep embeddings

inline constexpr int kEmbeddingDims = 256;

class EmbeddingError : public FormatError {
 public:
  enum class Kind { unreadable, bad_magic, bad_version, length_mismatch, dimension_mismatch, non_finite, zero_norm };

  EmbeddingError(Kind kind, const std::string& message) : FormatError(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Reads a "PEMB" embedding file; expected_dims <= 0 accepts any length.
FeatureVector load_embedding(const std::filesystem::path& path, int expected_dims = kEmbeddingDims);
FeatureVector parse_embedding(std::span<const std::uint8_t> bytes, int expected_dims = kEmbeddingDims);
void write_embedding(std::span<const float> values, const std::filesystem::path& path);

// ---------------------------------------------------------------------------

/// Sum-normalises histogram counts; an all-zero histogram stays zero.
void l1_normalize(std::span<double> hist);

}  // namespace periocular
