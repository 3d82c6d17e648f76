// Difference-of-Gaussians keypoints with 4x4x8 gradient descriptors.
//
// Follows Lowe's construction: s scales per octave (s + 3 Gaussian layers),
// extrema over 3x3x3 DoG neighbourhoods, quadratic sub-pixel refinement,
// contrast and edge-ratio rejection, dominant orientations from a smoothed
// 36-bin histogram, and trilinear descriptor accumulation. Pixel values stay
// in [0, 1]; an extremum survives when |D(x)| >= contrast_threshold / s, the
// per-layer scaling used by common SIFT implementations.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "periocular/error.hpp"
#include "periocular/features.hpp"
#include "util/csv.hpp"

namespace periocular {

namespace {

constexpr int kBorder = 5;
constexpr int kMaxInterpSteps = 5;
constexpr int kOriBins = 36;
constexpr double kOriSigmaFactor = 1.5;
constexpr double kOriRadiusFactor = 3.0 * kOriSigmaFactor;
constexpr double kOriPeakRatio = 0.8;
constexpr int kDescWidth = 4;
constexpr int kDescBins = 8;
constexpr double kDescScaleFactor = 3.0;
constexpr double kDescMagThreshold = 0.2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Plane {
  int w = 0, h = 0;
  std::vector<float> v;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.f) {}
  float operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
  float& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
};

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

Plane gaussian_blur(const Plane& src, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int k = -radius; k <= radius; ++k) {
    const double g = std::exp(-0.5 * k * k / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = g;
    sum += g;
  }
  for (auto& g : kernel) g /= sum;

  Plane tmp(src.w, src.h), out(src.w, src.h);
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < src.w; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] * src(reflect101(x + k, src.w), y);
      tmp(x, y) = static_cast<float>(acc);
    }
  }
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < src.w; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp(x, reflect101(y + k, src.h));
      out(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

Plane downsample(const Plane& src) {
  Plane out(src.w / 2, src.h / 2);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) out(x, y) = src(2 * x, 2 * y);
  return out;
}

Plane upsample(const Plane& src) {
  Plane out(src.w * 2, src.h * 2);
  for (int y = 0; y < out.h; ++y) {
    const double sy = std::clamp((y + 0.5) / 2.0 - 0.5, 0.0, src.h - 1.0);
    const int y0 = static_cast<int>(sy), y1 = std::min(y0 + 1, src.h - 1);
    const double fy = sy - y0;
    for (int x = 0; x < out.w; ++x) {
      const double sx = std::clamp((x + 0.5) / 2.0 - 0.5, 0.0, src.w - 1.0);
      const int x0 = static_cast<int>(sx), x1 = std::min(x0 + 1, src.w - 1);
      const double fx = sx - x0;
      out(x, y) = static_cast<float>((1 - fy) * ((1 - fx) * src(x0, y0) + fx * src(x1, y0)) +
                                     fy * ((1 - fx) * src(x0, y1) + fx * src(x1, y1)));
    }
  }
  return out;
}

struct Pyramid {
  std::vector<std::vector<Plane>> gauss;  // [octave][layer], s + 3 layers
  std::vector<std::vector<Plane>> dog;    // [octave][layer], s + 2 layers
};

Pyramid build_pyramid(const Plane& base, int octaves, const SiftParams& p) {
  const int s = p.scales_per_octave;
  std::vector<double> sig(static_cast<std::size_t>(s + 3));
  sig[0] = p.base_sigma;
  const double k = std::pow(2.0, 1.0 / s);
  for (int i = 1; i < s + 3; ++i) {
    const double prev = std::pow(k, i - 1) * p.base_sigma;
    const double total = prev * k;
    sig[static_cast<std::size_t>(i)] = std::sqrt(total * total - prev * prev);
  }

  Pyramid pyr;
  pyr.gauss.resize(static_cast<std::size_t>(octaves));
  pyr.dog.resize(static_cast<std::size_t>(octaves));
  for (int o = 0; o < octaves; ++o) {
    auto& layers = pyr.gauss[static_cast<std::size_t>(o)];
    layers.reserve(static_cast<std::size_t>(s + 3));
    layers.push_back(o == 0 ? base : downsample(pyr.gauss[static_cast<std::size_t>(o - 1)][static_cast<std::size_t>(s)]));
    for (int i = 1; i < s + 3; ++i)
      layers.push_back(gaussian_blur(layers.back(), sig[static_cast<std::size_t>(i)]));
    auto& dogs = pyr.dog[static_cast<std::size_t>(o)];
    for (int i = 0; i < s + 2; ++i) {
      const auto& a = layers[static_cast<std::size_t>(i)];
      const auto& b = layers[static_cast<std::size_t>(i + 1)];
      Plane d(a.w, a.h);
      for (std::size_t j = 0; j < d.v.size(); ++j) d.v[j] = b.v[j] - a.v[j];
      dogs.push_back(std::move(d));
    }
  }
  return pyr;
}

bool is_extremum(const std::vector<Plane>& dogs, int layer, int x, int y, float val) {
  const bool is_max = val > 0;
  for (int l = layer - 1; l <= layer + 1; ++l) {
    const auto& d = dogs[static_cast<std::size_t>(l)];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (l == layer && dx == 0 && dy == 0) continue;
        const float n = d(x + dx, y + dy);
        if (is_max ? n > val : n < val) return false;
      }
    }
  }
  return true;
}

struct Extremum {
  int octave = 0;
  int layer = 0;
  int x = 0, y = 0;      // integer location in the octave
  double xi = 0;         // sub-layer offset
  double ox = 0, oy = 0; // refined octave coordinates
};

// Quadratic refinement; returns false when the point is rejected.
bool refine(const std::vector<Plane>& dogs, int s, Extremum& e, const SiftParams& p) {
  double dx_off = 0, dy_off = 0, ds_off = 0;
  int x = e.x, y = e.y, layer = e.layer;
  double grad[3]{}, hess[3][3]{};
  int step = 0;
  for (; step < kMaxInterpSteps; ++step) {
    const auto& prev = dogs[static_cast<std::size_t>(layer - 1)];
    const auto& cur = dogs[static_cast<std::size_t>(layer)];
    const auto& next = dogs[static_cast<std::size_t>(layer + 1)];
    const double v2 = 2.0 * cur(x, y);
    grad[0] = 0.5 * (cur(x + 1, y) - cur(x - 1, y));
    grad[1] = 0.5 * (cur(x, y + 1) - cur(x, y - 1));
    grad[2] = 0.5 * (next(x, y) - prev(x, y));
    hess[0][0] = cur(x + 1, y) + cur(x - 1, y) - v2;
    hess[1][1] = cur(x, y + 1) + cur(x, y - 1) - v2;
    hess[2][2] = next(x, y) + prev(x, y) - v2;
    hess[0][1] = hess[1][0] = 0.25 * (cur(x + 1, y + 1) - cur(x - 1, y + 1) - cur(x + 1, y - 1) + cur(x - 1, y - 1));
    hess[0][2] = hess[2][0] = 0.25 * (next(x + 1, y) - next(x - 1, y) - prev(x + 1, y) + prev(x - 1, y));
    hess[1][2] = hess[2][1] = 0.25 * (next(x, y + 1) - next(x, y - 1) - prev(x, y + 1) + prev(x, y - 1));

    // solve hess * X = -grad by Cramer's rule
    const auto det3 = [](const double m[3][3]) {
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double det = det3(hess);
    if (std::abs(det) < 1e-300) return false;
    double sol[3];
    for (int c = 0; c < 3; ++c) {
      double m[3][3];
      for (int r = 0; r < 3; ++r)
        for (int q = 0; q < 3; ++q) m[r][q] = q == c ? -grad[r] : hess[r][q];
      sol[c] = det3(m) / det;
    }
    dx_off = sol[0];
    dy_off = sol[1];
    ds_off = sol[2];
    if (std::abs(dx_off) < 0.5 && std::abs(dy_off) < 0.5 && std::abs(ds_off) < 0.5) break;
    if (std::abs(dx_off) > 1e6 || std::abs(dy_off) > 1e6 || std::abs(ds_off) > 1e6) return false;
    x += static_cast<int>(std::lround(dx_off));
    y += static_cast<int>(std::lround(dy_off));
    layer += static_cast<int>(std::lround(ds_off));
    if (layer < 1 || layer > s || x < kBorder || x >= cur.w - kBorder || y < kBorder || y >= cur.h - kBorder)
      return false;
  }
  if (step >= kMaxInterpSteps) return false;

  const auto& cur = dogs[static_cast<std::size_t>(layer)];
  const double contrast = cur(x, y) + 0.5 * (grad[0] * dx_off + grad[1] * dy_off + grad[2] * ds_off);
  if (std::abs(contrast) * p.scales_per_octave < p.contrast_threshold) return false;

  const double tr = hess[0][0] + hess[1][1];
  const double det = hess[0][0] * hess[1][1] - hess[0][1] * hess[0][1];
  const double r = p.edge_ratio;
  if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) return false;

  e.x = x;
  e.y = y;
  e.layer = layer;
  e.xi = ds_off;
  e.ox = x + dx_off;
  e.oy = y + dy_off;
  return true;
}

std::vector<double> orientation_histogram(const Plane& img, int cx, int cy, int radius, double sigma) {
  std::vector<double> hist(kOriBins, 0.0);
  const double expf_scale = -1.0 / (2.0 * sigma * sigma);
  for (int j = -radius; j <= radius; ++j) {
    const int y = cy + j;
    if (y <= 0 || y >= img.h - 1) continue;
    for (int i = -radius; i <= radius; ++i) {
      const int x = cx + i;
      if (x <= 0 || x >= img.w - 1) continue;
      const double dx = img(x + 1, y) - img(x - 1, y);
      const double dy = img(x, y + 1) - img(x, y - 1);
      const double w = std::exp((i * i + j * j) * expf_scale);
      double angle = std::atan2(dy, dx);
      if (angle < 0) angle += kTwoPi;
      int bin = static_cast<int>(std::lround(angle * kOriBins / kTwoPi));
      if (bin >= kOriBins) bin -= kOriBins;
      hist[static_cast<std::size_t>(bin)] += w * std::hypot(dx, dy);
    }
  }
  std::vector<double> smooth(kOriBins);
  for (int i = 0; i < kOriBins; ++i) {
    auto at = [&](int k) { return hist[static_cast<std::size_t>((k + kOriBins) % kOriBins)]; };
    smooth[static_cast<std::size_t>(i)] =
        (at(i - 2) + at(i + 2)) * (1.0 / 16) + (at(i - 1) + at(i + 1)) * (4.0 / 16) + at(i) * (6.0 / 16);
  }
  return smooth;
}

bool compute_descriptor(const Plane& img, double ox, double oy, double orientation, double scl,
                        std::array<float, 128>& out) {
  const int d = kDescWidth, n = kDescBins;
  const int px = static_cast<int>(std::lround(ox)), py = static_cast<int>(std::lround(oy));
  const double cos_t = std::cos(orientation), sin_t = std::sin(orientation);
  const double bins_per_rad = n / kTwoPi;
  const double exp_scale = -1.0 / (d * d * 0.5);
  const double hist_width = kDescScaleFactor * scl;
  int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
  radius = std::min(radius, static_cast<int>(std::sqrt(static_cast<double>(img.w) * img.w + img.h * img.h)));

  std::vector<double> hist(static_cast<std::size_t>((d + 2) * (d + 2) * (n + 2)), 0.0);
  auto cell = [&](int r, int c, int o) -> double& {
    return hist[static_cast<std::size_t>(((r * (d + 2)) + c) * (n + 2) + o)];
  };

  for (int j = -radius; j <= radius; ++j) {
    for (int i = -radius; i <= radius; ++i) {
      // offsets rotated into the keypoint frame, in histogram-cell units
      const double c_rot = (cos_t * i + sin_t * j) / hist_width;
      const double r_rot = (-sin_t * i + cos_t * j) / hist_width;
      const double rbin = r_rot + d / 2.0 - 0.5;
      const double cbin = c_rot + d / 2.0 - 0.5;
      const int x = px + i, y = py + j;
      if (!(rbin > -1 && rbin < d && cbin > -1 && cbin < d)) continue;
      if (x <= 0 || x >= img.w - 1 || y <= 0 || y >= img.h - 1) continue;
      const double dx = img(x + 1, y) - img(x - 1, y);
      const double dy = img(x, y + 1) - img(x, y - 1);
      const double mag = std::hypot(dx, dy) * std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);
      double ori = std::atan2(dy, dx) - orientation;
      ori = std::fmod(ori, kTwoPi);
      if (ori < 0) ori += kTwoPi;
      const double obin = ori * bins_per_rad;

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0, fc = cbin - c0, fo = obin - o0;
      if (o0 < 0) o0 += n;
      if (o0 >= n) o0 -= n;

      const double v_r1 = mag * fr, v_r0 = mag - v_r1;
      const double v_rc11 = v_r1 * fc, v_rc10 = v_r1 - v_rc11;
      const double v_rc01 = v_r0 * fc, v_rc00 = v_r0 - v_rc01;
      const double v_rco111 = v_rc11 * fo, v_rco110 = v_rc11 - v_rco111;
      const double v_rco101 = v_rc10 * fo, v_rco100 = v_rc10 - v_rco101;
      const double v_rco011 = v_rc01 * fo, v_rco010 = v_rc01 - v_rco011;
      const double v_rco001 = v_rc00 * fo, v_rco000 = v_rc00 - v_rco001;

      cell(r0 + 1, c0 + 1, o0) += v_rco000;
      cell(r0 + 1, c0 + 1, o0 + 1) += v_rco001;
      cell(r0 + 1, c0 + 2, o0) += v_rco010;
      cell(r0 + 1, c0 + 2, o0 + 1) += v_rco011;
      cell(r0 + 2, c0 + 1, o0) += v_rco100;
      cell(r0 + 2, c0 + 1, o0 + 1) += v_rco101;
      cell(r0 + 2, c0 + 2, o0) += v_rco110;
      cell(r0 + 2, c0 + 2, o0 + 1) += v_rco111;
    }
  }

  std::array<double, 128> desc{};
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      cell(r + 1, c + 1, 0) += cell(r + 1, c + 1, n);
      cell(r + 1, c + 1, 1) += cell(r + 1, c + 1, n + 1);
      for (int o = 0; o < n; ++o) desc[static_cast<std::size_t>((r * d + c) * n + o)] = cell(r + 1, c + 1, o);
    }
  }

  double norm = 0;
  for (double v : desc) norm += v * v;
  norm = std::sqrt(norm);
  if (norm <= 0) return false;
  const double thr = norm * kDescMagThreshold;
  norm = 0;
  for (double& v : desc) {
    v = std::min(v, thr);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm <= 0) return false;
  for (std::size_t k = 0; k < desc.size(); ++k) out[k] = static_cast<float>(desc[k] / norm);
  return true;
}

}  // namespace

std::string SiftParams::id() const {
  return "sift-s" + std::to_string(scales_per_octave) + "-sigma" + csv::format_double(base_sigma) +
         "-c" + csv::format_double(contrast_threshold) + "-e" + csv::format_double(edge_ratio) +
         (double_image ? "-x2" : "");
}

KeypointSet extract_sift(const GrayImage& img, const SiftParams& p) {
  if (p.scales_per_octave < 1 || p.base_sigma <= 0) throw InvalidArgument("invalid SIFT parameters");
  if (img.width() < 32 || img.height() < 32) throw InvalidArgument("SIFT needs an image of at least 32x32");

  Plane input(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) input(x, y) = static_cast<float>(img(x, y));

  double blur = p.assumed_blur;
  double coord_scale = 1.0;
  if (p.double_image) {
    input = upsample(input);
    blur *= 2.0;
    coord_scale = 0.5;
  }
  const double sig_diff = std::sqrt(std::max(p.base_sigma * p.base_sigma - blur * blur, 0.01));
  const Plane base = gaussian_blur(input, sig_diff);

  const int min_side = std::min(base.w, base.h);
  const int octaves = std::clamp(static_cast<int>(std::floor(std::log2(min_side))) - 2, 1, p.max_octaves);
  const int s = p.scales_per_octave;
  const Pyramid pyr = build_pyramid(base, octaves, p);
  const float prelim = static_cast<float>(0.5 * p.contrast_threshold / s);

  KeypointSet out;
  for (int o = 0; o < octaves; ++o) {
    const auto& dogs = pyr.dog[static_cast<std::size_t>(o)];
    const int w = dogs[0].w, h = dogs[0].h;
    if (w <= 2 * kBorder || h <= 2 * kBorder) continue;
    for (int layer = 1; layer <= s; ++layer) {
      const auto& cur = dogs[static_cast<std::size_t>(layer)];
      for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
          const float val = cur(x, y);
          if (std::abs(val) <= prelim || !is_extremum(dogs, layer, x, y, val)) continue;
          Extremum e{o, layer, x, y};
          if (!refine(dogs, s, e, p)) continue;

          const double scl_octv = p.base_sigma * std::pow(2.0, (e.layer + e.xi) / s);
          const double octave_scale = std::ldexp(1.0, o) * coord_scale;
          const auto& gimg = pyr.gauss[static_cast<std::size_t>(o)][static_cast<std::size_t>(e.layer)];
          const auto hist = orientation_histogram(gimg, e.x, e.y,
                                                  static_cast<int>(std::lround(kOriRadiusFactor * scl_octv)),
                                                  kOriSigmaFactor * scl_octv);
          const double max_val = *std::max_element(hist.begin(), hist.end());
          if (max_val <= 0) continue;
          for (int j = 0; j < kOriBins; ++j) {
            const double l = hist[static_cast<std::size_t>((j + kOriBins - 1) % kOriBins)];
            const double r = hist[static_cast<std::size_t>((j + 1) % kOriBins)];
            const double c = hist[static_cast<std::size_t>(j)];
            if (!(c > l && c > r && c >= kOriPeakRatio * max_val)) continue;
            double bin = j + 0.5 * (l - r) / (l - 2 * c + r);
            if (bin < 0) bin += kOriBins;
            if (bin >= kOriBins) bin -= kOriBins;
            const double orientation = bin * kTwoPi / kOriBins;
            Keypoint kp;
            kp.x = e.ox * octave_scale;
            kp.y = e.oy * octave_scale;
            kp.scale = scl_octv * octave_scale;
            kp.orientation = orientation;
            if (compute_descriptor(gimg, e.ox, e.oy, orientation, scl_octv, kp.descriptor))
              out.keypoints.push_back(kp);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace periocular
