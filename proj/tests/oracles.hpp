#pragma once

// Deliberately naive reference implementations used to cross-check the
// optimised extractors and metrics.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "periocular/imaging.hpp"

namespace periocular::oracle {

inline std::vector<double> normalized(std::vector<double> h) {
  double total = 0;
  for (double v : h) total += v;
  if (total > 0)
    for (auto& v : h) v /= total;
  return h;
}

inline bool is_uniform(int code) {
  int transitions = 0;
  for (int i = 0; i < 8; ++i) transitions += ((code >> i) & 1) != ((code >> ((i + 1) % 8)) & 1);
  return transitions <= 2;
}

// u2 bin of a code: uniform codes numbered in ascending order, the rest share bin 58.
inline int u2_bin(int code) {
  if (!is_uniform(code)) return 58;
  int bin = 0;
  for (int c = 0; c < code; ++c) bin += is_uniform(c);
  return bin;
}

inline double bilinear(const GrayImage& img, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  auto at = [&](int xx, int yy) { return (xx < img.width() && yy < img.height()) ? img(xx, yy) : 0.0; };
  return (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x0 + 1, y0) + (1 - fx) * fy * at(x0, y0 + 1) +
         fx * fy * at(x0 + 1, y0 + 1);
}

// Radius-1 uniform LBP histogram of one patch.
inline std::vector<double> lbp_histogram(const GrayImage& patch) {
  std::vector<double> h(59, 0.0);
  for (int y = 1; y + 1 < patch.height(); ++y)
    for (int x = 1; x + 1 < patch.width(); ++x) {
      int code = 0;
      for (int p = 0; p < 8; ++p) {
        const double a = 2 * std::numbers::pi * p / 8;
        const double dx = std::round(std::cos(a) * 1e6) / 1e6, dy = -std::round(std::sin(a) * 1e6) / 1e6;
        if (bilinear(patch, x + dx, y + dy) >= patch(x, y)) code += 1 << p;
      }
      h[static_cast<std::size_t>(u2_bin(code))] += 1;
    }
  return normalized(h);
}

// Direct windowed DFT at the four LPQ frequencies.
inline std::vector<double> lpq_histogram(const GrayImage& patch, int m = 7) {
  const int r = m / 2;
  const double a = 1.0 / m;
  const int freqs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  std::vector<double> h(256, 0.0);
  for (int y = r; y + r < patch.height(); ++y)
    for (int x = r; x + r < patch.width(); ++x) {
      int code = 0;
      for (int f = 0; f < 4; ++f) {
        std::complex<double> sum = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            sum += patch(x + dx, y + dy) *
                   std::exp(std::complex<double>(0, -2 * std::numbers::pi * a * (freqs[f][0] * dx + freqs[f][1] * dy)));
        if (sum.real() >= 0) code |= 1 << (2 * f);
        if (sum.imag() >= 0) code |= 1 << (2 * f + 1);
      }
      h[static_cast<std::size_t>(code)] += 1;
    }
  return normalized(h);
}

// Block-averaged transitional LBP with per-region histograms.
inline std::vector<double> mbtlbp_histograms(const GrayImage& img, int block, int rows = 4, int cols = 4) {
  const int pw = img.width() / block, ph = img.height() / block;
  std::vector<std::vector<double>> pooled(static_cast<std::size_t>(ph), std::vector<double>(static_cast<std::size_t>(pw)));
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) {
      double s = 0;
      for (int j = 0; j < block; ++j)
        for (int i = 0; i < block; ++i) s += img(x * block + i, y * block + j);
      pooled[y][x] = s / (block * block);
    }
  // neighbours walked counter-clockwise starting east
  const int ring[8][2] = {{1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  const int cw = pw - 2, ch = ph - 2;
  std::vector<double> out;
  for (int ry = 0; ry < rows; ++ry)
    for (int rx = 0; rx < cols; ++rx) {
      std::vector<double> h(256, 0.0);
      for (int y = 0; y < ch; ++y) {
        if (y * rows / ch != ry) continue;
        for (int x = 0; x < cw; ++x) {
          if (x * cols / cw != rx) continue;
          int code = 0;
          for (int i = 0; i < 8; ++i) {
            const double cur = pooled[y + 1 + ring[i][1]][x + 1 + ring[i][0]];
            const double nxt = pooled[y + 1 + ring[(i + 1) % 8][1]][x + 1 + ring[(i + 1) % 8][0]];
            if (nxt >= cur) code |= 1 << i;
          }
          h[static_cast<std::size_t>(code)] += 1;
        }
      }
      h = normalized(h);
      out.insert(out.end(), h.begin(), h.end());
    }
  return out;
}

// O(n^2) pairwise AUC.
inline double auc(const std::vector<double>& g, const std::vector<double>& im) {
  double s = 0;
  for (double a : g)
    for (double b : im) s += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return s / (static_cast<double>(g.size()) * static_cast<double>(im.size()));
}

inline double decidability(const std::vector<double>& g, const std::vector<double>& im) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  auto var = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
  };
  return std::abs(mean(g) - mean(im)) / std::sqrt((var(g) + var(im)) / 2);
}

}  // namespace periocular::oracle
