#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

#include "periocular/error.hpp"
#include "periocular/features.hpp"

namespace periocular {

namespace {

using cplx = std::complex<double>;

// Component order: Re/Im of u1=(a,0), u2=(0,a), u3=(a,a), u4=(a,-a).
constexpr int kComponents = 8;

// Whitening transform for the 8 STFT components, assuming pixel correlation
// rho^distance inside the window.
Eigen::Matrix<double, 8, 8> whitening(int window, double rho) {
  const int r = (window - 1) / 2;
  const int n = window * window;
  const double a = 1.0 / window;
  Eigen::MatrixXd basis(kComponents, n);
  const std::array<std::pair<int, int>, 4> freqs{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};
  for (int k = 0; k < n; ++k) {
    const int dx = k % window - r, dy = k / window - r;
    for (int f = 0; f < 4; ++f) {
      const double phase = -2.0 * std::numbers::pi * a * (freqs[f].first * dx + freqs[f].second * dy);
      basis(2 * f, k) = std::cos(phase);
      basis(2 * f + 1, k) = std::sin(phase);
    }
  }
  Eigen::MatrixXd corr(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = std::hypot(i % window - j % window, i / window - j / window);
      corr(i, j) = std::pow(rho, d);
    }
  }
  Eigen::Matrix<double, 8, 8> cov = basis * corr * basis.transpose();
  // tiny distinct scaling breaks ties between equal singular values
  Eigen::Matrix<double, 8, 8> scale = Eigen::Matrix<double, 8, 8>::Zero();
  for (int i = 0; i < 8; ++i) scale(i, i) = 1.0 + 1e-6 * (7 - i);
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 8>> svd(scale * cov * scale, Eigen::ComputeFullV);
  return svd.matrixV().transpose();
}

}  // namespace

std::string LpqParams::id() const {
  return "lpq-" + std::to_string(window) + (decorrelate ? "-w" : "");
}

std::vector<int> lpq_codes(const GrayImage& patch, const LpqParams& params) {
  if (params.window < 3 || params.window % 2 == 0)
    throw InvalidArgument("LPQ window must be odd and >= 3");
  const int m = params.window, r = (m - 1) / 2;
  if (patch.width() < m || patch.height() < m)
    throw InvalidArgument("patch of " + std::to_string(patch.width()) + "x" +
                          std::to_string(patch.height()) + " is smaller than the LPQ window");

  std::vector<cplx> w1(static_cast<std::size_t>(m));
  for (int k = -r; k <= r; ++k)
    w1[static_cast<std::size_t>(k + r)] = std::polar(1.0, -2.0 * std::numbers::pi * k / m);

  // horizontal pass: plain sum and w1-weighted sum for each valid column
  const int out_w = patch.width() - 2 * r, out_h = patch.height() - 2 * r;
  const int h = patch.height();
  std::vector<double> row0(static_cast<std::size_t>(out_w) * h);
  std::vector<cplx> row1(static_cast<std::size_t>(out_w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double s0 = 0;
      cplx s1 = 0;
      for (int k = 0; k < m; ++k) {
        const double v = patch(x + k, y);
        s0 += v;
        s1 += v * w1[static_cast<std::size_t>(k)];
      }
      row0[static_cast<std::size_t>(y) * out_w + x] = s0;
      row1[static_cast<std::size_t>(y) * out_w + x] = s1;
    }
  }

  const Eigen::Matrix<double, 8, 8> white =
      params.decorrelate ? whitening(m, params.rho) : Eigen::Matrix<double, 8, 8>::Identity();

  std::vector<int> codes;
  codes.reserve(static_cast<std::size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      cplx f1 = 0, f2 = 0, f3 = 0, f4 = 0;
      for (int k = 0; k < m; ++k) {
        const auto idx = static_cast<std::size_t>(y + k) * out_w + x;
        const cplx wk = w1[static_cast<std::size_t>(k)];
        f1 += row1[idx];
        f2 += row0[idx] * wk;
        f3 += row1[idx] * wk;
        f4 += row1[idx] * std::conj(wk);
      }
      Eigen::Matrix<double, 8, 1> v;
      v << f1.real(), f1.imag(), f2.real(), f2.imag(), f3.real(), f3.imag(), f4.real(), f4.imag();
      if (params.decorrelate) v = white * v;
      int code = 0;
      for (int b = 0; b < kComponents; ++b)
        if (v[b] >= 0.0) code |= 1 << b;
      codes.push_back(code);
    }
  }
  return codes;
}

FeatureVector extract_lpq(const PatchGrid& grid, const LpqParams& params) {
  if (grid.patches.empty()) throw InvalidArgument("empty patch grid");
  FeatureVector out{params.id(), {}};
  out.values.assign(grid.patches.size() * 256, 0.0);
  for (std::size_t i = 0; i < grid.patches.size(); ++i) {
    std::span<double> hist(out.values.data() + i * 256, 256);
    for (int code : lpq_codes(grid.patches[i], params)) hist[static_cast<std::size_t>(code)] += 1.0;
    l1_normalize(hist);
  }
  return out;
}

}  // namespace periocular
