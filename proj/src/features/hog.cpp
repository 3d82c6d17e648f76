#include <algorithm>
#include <cmath>
#include <numbers>

#include "periocular/error.hpp"
#include "periocular/features.hpp"
#include "util/csv.hpp"

namespace periocular {

namespace {

constexpr double kNormEpsSq = 1e-12;

void l2_normalize(std::span<double> v) {
  double ss = 0;
  for (double x : v) ss += x * x;
  const double inv = 1.0 / std::sqrt(ss + kNormEpsSq);
  for (double& x : v) x *= inv;
}

}  // namespace

std::string HogParams::id() const {
  return "hog-" + std::to_string(resize_to) + "-c" + std::to_string(cell_size) + "-b" +
         std::to_string(bins) + "-k" + std::to_string(block_cells) + "-clip" + csv::format_double(clip);
}

std::size_t hog_dimension(const HogParams& params, int side) {
  const int s = params.resize_to > 0 ? params.resize_to : side;
  const int cells = s / params.cell_size;
  const int blocks = cells - params.block_cells + 1;
  if (blocks <= 0) return 0;
  return static_cast<std::size_t>(blocks) * blocks * params.block_cells * params.block_cells * params.bins;
}

FeatureVector extract_hog(const GrayImage& input, const HogParams& params) {
  if (input.width() <= 0 || input.height() <= 0) throw InvalidArgument("HOG needs a non-empty image");
  if (input.width() != input.height())
    throw InvalidArgument("HOG needs a square image, got " + std::to_string(input.width()) + "x" +
                          std::to_string(input.height()));
  if (params.cell_size < 1 || params.bins < 1 || params.block_cells < 1)
    throw InvalidArgument("invalid HOG parameters");
  const GrayImage img =
      params.resize_to > 0 ? resize(input, params.resize_to, params.resize_to) : input;
  const int w = img.width(), h = img.height();
  const int cells_x = w / params.cell_size, cells_y = h / params.cell_size;
  const int blocks_x = cells_x - params.block_cells + 1, blocks_y = cells_y - params.block_cells + 1;
  if (blocks_x < 1 || blocks_y < 1) throw InvalidArgument("image too small for one HOG block");

  const auto nbins = static_cast<std::size_t>(params.bins);
  std::vector<double> cell_hist(static_cast<std::size_t>(cells_x) * cells_y * nbins, 0.0);
  const double bin_width = 180.0 / params.bins;

  for (int y = 0; y < cells_y * params.cell_size; ++y) {
    for (int x = 0; x < cells_x * params.cell_size; ++x) {
      const double gx = img(std::min(x + 1, w - 1), y) - img(std::max(x - 1, 0), y);
      const double gy = img(x, std::min(y + 1, h - 1)) - img(x, std::max(y - 1, 0));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;
      // bin centres at 0, 20, ..., 160 degrees
      const double pos = angle / bin_width;
      const double lo = std::floor(pos);
      const double frac = pos - lo;
      const auto b0 = static_cast<std::size_t>(lo) % nbins;
      const auto b1 = (b0 + 1) % nbins;
      auto* hist = &cell_hist[(static_cast<std::size_t>(y / params.cell_size) * cells_x +
                               static_cast<std::size_t>(x / params.cell_size)) * nbins];
      hist[b0] += (1.0 - frac) * mag;
      hist[b1] += frac * mag;
    }
  }

  const std::size_t block_len = static_cast<std::size_t>(params.block_cells) * params.block_cells * nbins;
  FeatureVector out{params.id(), {}};
  out.values.reserve(static_cast<std::size_t>(blocks_x) * blocks_y * block_len);
  std::vector<double> block(block_len);
  for (int by = 0; by < blocks_y; ++by) {
    for (int bx = 0; bx < blocks_x; ++bx) {
      std::size_t k = 0;
      for (int cy = 0; cy < params.block_cells; ++cy) {
        for (int cx = 0; cx < params.block_cells; ++cx) {
          const auto* hist = &cell_hist[(static_cast<std::size_t>(by + cy) * cells_x + (bx + cx)) * nbins];
          for (std::size_t b = 0; b < nbins; ++b) block[k++] = hist[b];
        }
      }
      // L2-Hys
      l2_normalize(block);
      for (double& v : block) v = std::min(v, params.clip);
      l2_normalize(block);
      out.values.insert(out.values.end(), block.begin(), block.end());
    }
  }
  return out;
}

}  // namespace periocular
