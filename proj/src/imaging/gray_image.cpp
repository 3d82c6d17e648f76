#include <algorithm>
#include <cmath>

#include "periocular/error.hpp"
#include "periocular/imaging.hpp"

namespace periocular {

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidArgument("negative image dimensions");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0 ||
      pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw InvalidArgument("pixel count does not match image dimensions");
}

GrayImage to_grayscale(const RgbImage& rgb, IntensityMode mode) {
  if (rgb.empty()) throw InvalidArgument("cannot convert an empty image to grayscale");
  if (rgb.rgb.size() != static_cast<std::size_t>(rgb.width) * rgb.height * 3)
    throw InvalidArgument("RGB buffer size does not match dimensions");
  GrayImage out(rgb.width, rgb.height);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double r = rgb.rgb[3 * i], g = rgb.rgb[3 * i + 1], b = rgb.rgb[3 * i + 2];
    double v = mode == IntensityMode::max_channel ? std::max({r, g, b})
                                                  : 0.299 * r + 0.587 * g + 0.114 * b;
    dst[i] = std::clamp(v / 255.0, 0.0, 1.0);
  }
  return out;
}

double sample_bilinear(const GrayImage& img, double x, double y) {
  const double fx0 = std::floor(x), fy0 = std::floor(y);
  const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
  const double fx = x - fx0, fy = y - fy0;
  const double p00 = img.at_or_zero(x0, y0);
  const double p10 = fx == 0.0 ? 0.0 : img.at_or_zero(x0 + 1, y0);
  const double p01 = fy == 0.0 ? 0.0 : img.at_or_zero(x0, y0 + 1);
  const double p11 = (fx == 0.0 || fy == 0.0) ? 0.0 : img.at_or_zero(x0 + 1, y0 + 1);
  // difference form: exact on constant neighbourhoods
  double v = p00;
  if (fx != 0.0) v += fx * (p10 - p00);
  if (fy != 0.0) v += fy * (p01 - p00);
  if (fx != 0.0 && fy != 0.0) v += fx * fy * (p00 - p10 - p01 + p11);
  return v;
}

GrayImage resize(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1) throw InvalidArgument("resize target must be at least 1x1");
  if (img.empty()) throw InvalidArgument("cannot resize an empty image");
  if (width == img.width() && height == img.height()) return img;

  auto axis = [](int dst_len, int src_len) {
    std::vector<std::pair<int, double>> taps(static_cast<std::size_t>(dst_len));
    const double ratio = static_cast<double>(src_len) / dst_len;
    for (int i = 0; i < dst_len; ++i) {
      double s = std::clamp((i + 0.5) * ratio - 0.5, 0.0, static_cast<double>(src_len - 1));
      int i0 = std::min(static_cast<int>(std::floor(s)), src_len - 1);
      taps[static_cast<std::size_t>(i)] = {i0, s - i0};
    }
    return taps;
  };
  const auto xs = axis(width, img.width());
  const auto ys = axis(height, img.height());

  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const auto [y0, fy] = ys[static_cast<std::size_t>(y)];
    const int y1 = std::min(y0 + 1, img.height() - 1);
    for (int x = 0; x < width; ++x) {
      const auto [x0, fx] = xs[static_cast<std::size_t>(x)];
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double p00 = img(x0, y0), p10 = img(x1, y0), p01 = img(x0, y1), p11 = img(x1, y1);
      double v = p00 + fx * (p10 - p00) + fy * (p01 - p00) + fx * fy * (p00 - p10 - p01 + p11);
      out(x, y) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

PatchGrid tile_patches(const GrayImage& img, int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidArgument("patch grid needs at least one row and column");
  if (img.empty() || img.width() % cols != 0 || img.height() % rows != 0)
    throw InvalidArgument(std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                          " image is not divisible into a " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " grid");
  const int pw = img.width() / cols, ph = img.height() / rows;
  PatchGrid grid{{}, rows, cols};
  grid.patches.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      GrayImage patch(pw, ph);
      for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) patch(x, y) = img(c * pw + x, r * ph + y);
      grid.patches.push_back(std::move(patch));
    }
  }
  return grid;
}

GrayImage assemble_patches(const PatchGrid& grid) {
  if (grid.rows < 1 || grid.cols < 1 ||
      grid.patches.size() != static_cast<std::size_t>(grid.rows * grid.cols))
    throw InvalidArgument("patch grid is inconsistent");
  const int pw = grid.patches.front().width(), ph = grid.patches.front().height();
  GrayImage out(pw * grid.cols, ph * grid.rows);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const auto& patch = grid.patches[static_cast<std::size_t>(r * grid.cols + c)];
      if (patch.width() != pw || patch.height() != ph)
        throw InvalidArgument("patches differ in size");
      for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) out(c * pw + x, r * ph + y) = patch(x, y);
    }
  }
  return out;
}

}  // namespace periocular
