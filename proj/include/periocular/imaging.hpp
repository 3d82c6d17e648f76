#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "periocular/data.hpp"

namespace periocular {

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // size 3 * width * height

  bool empty() const { return width <= 0 || height <= 0; }
};

/// Row-major intensity raster with values in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  double operator()(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator()(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Zero outside the raster.
  double at_or_zero(int x, int y) const {
    return (x < 0 || y < 0 || x >= width_ || y >= height_) ? 0.0 : (*this)(x, y);
  }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

enum class IntensityMode { max_channel, luma };

/// Intensity channel: max(R,G,B)/255 by default, or Rec.601 luma.
GrayImage to_grayscale(const RgbImage& rgb, IntensityMode mode = IntensityMode::max_channel);

/// Bilinear resize with half-pixel centres; edge samples are clamped.
GrayImage resize(const GrayImage& img, int width, int height);

/// Bilinear sample at (x, y); taps outside the raster read as zero.
double sample_bilinear(const GrayImage& img, double x, double y);

struct Point2 {
  double x = 0, y = 0;
};

/// 2x3 affine map p' = A p + t.
struct Affine2 {
  std::array<double, 4> a{1, 0, 0, 1};  // row-major 2x2
  Point2 t{};

  Point2 apply(Point2 p) const {
    return {a[0] * p.x + a[1] * p.y + t.x, a[2] * p.x + a[3] * p.y + t.y};
  }
  Affine2 inverse() const;

  /// Rotation by `radians` (counter-clockwise in image coordinates with y down
  /// appears clockwise on screen) and isotropic scale about `center`.
  static Affine2 rotation_about(Point2 center, double radians, double scale = 1.0);
};

struct WarpResult {
  GrayImage image;
  bool padded = false;  // some output pixel sampled outside the source
};

/// Inverse-mapped warp: out(p) = img(dst_to_src(p)).
WarpResult warp(const GrayImage& img, const Affine2& dst_to_src, int out_width, int out_height);

struct AlignmentParams {
  int out_size = 256;
  /// Inter-iris distance as a fraction of out_size after scaling.
  double inter_iris_fraction = 0.4;
};

struct AlignedEyes {
  GrayImage left_eye;
  GrayImage right_eye;
  bool left_padded = false;
  bool right_padded = false;
  double rotation_radians = 0.0;  // rotation applied to the image
  double scale = 1.0;
  /// Maps source coordinates into the rotated/scaled frame (before cropping),
  /// whose origin is the midpoint of the two iris centres.
  Affine2 source_to_aligned;
};

/// Rotates so the iris centres lie on a horizontal line, scales the inter-iris
/// distance to the configured fraction, and crops a square around each iris.
AlignedEyes align_and_crop(const GrayImage& img, const Rect& left_iris, const Rect& right_iris,
                           const AlignmentParams& params = {});

struct PatchGrid {
  std::vector<GrayImage> patches;  // row-major
  int rows = 0;
  int cols = 0;
};

PatchGrid tile_patches(const GrayImage& img, int rows, int cols);
GrayImage assemble_patches(const PatchGrid& grid);

// Codec access; 8-bit channels map to [0,1] by division by 255.
RgbImage read_rgb(const std::filesystem::path& path);
RgbImage decode_rgb(std::span<const std::uint8_t> encoded);
GrayImage read_gray(const std::filesystem::path& path, IntensityMode mode = IntensityMode::max_channel);
/// Quantises to 8 bits; format chosen from the extension.
void write_gray(const GrayImage& img, const std::filesystem::path& path);

}  // namespace periocular
