#include <algorithm>
#include <cmath>
#include <numbers>

#include "periocular/error.hpp"
#include "periocular/imaging.hpp"

namespace periocular {

Affine2 Affine2::inverse() const {
  const double det = a[0] * a[3] - a[1] * a[2];
  if (std::abs(det) < 1e-300) throw InvalidArgument("singular affine map");
  Affine2 inv;
  inv.a = {a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
  inv.t = {-(inv.a[0] * t.x + inv.a[1] * t.y), -(inv.a[2] * t.x + inv.a[3] * t.y)};
  return inv;
}

Affine2 Affine2::rotation_about(Point2 center, double radians, double scale) {
  const double c = std::cos(radians) * scale, s = std::sin(radians) * scale;
  Affine2 m;
  m.a = {c, -s, s, c};
  m.t = {center.x - (c * center.x - s * center.y), center.y - (s * center.x + c * center.y)};
  return m;
}

WarpResult warp(const GrayImage& img, const Affine2& dst_to_src, int out_width, int out_height) {
  if (img.empty()) throw InvalidArgument("cannot warp an empty image");
  WarpResult result{GrayImage(out_width, out_height), false};
  constexpr double kTol = 1e-9;
  const double max_x = img.width() - 1, max_y = img.height() - 1;
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point2 s = dst_to_src.apply({static_cast<double>(x), static_cast<double>(y)});
      if (s.x < -kTol || s.y < -kTol || s.x > max_x + kTol || s.y > max_y + kTol)
        result.padded = true;
      // snap near-integer coordinates so pure translations copy pixels exactly
      const double sx = std::abs(s.x - std::round(s.x)) < kTol ? std::round(s.x) : s.x;
      const double sy = std::abs(s.y - std::round(s.y)) < kTol ? std::round(s.y) : s.y;
      result.image(x, y) = std::clamp(sample_bilinear(img, sx, sy), 0.0, 1.0);
    }
  }
  return result;
}

AlignedEyes align_and_crop(const GrayImage& img, const Rect& left_iris, const Rect& right_iris,
                           const AlignmentParams& params) {
  if (img.empty()) throw InvalidArgument("cannot align an empty image");
  if (params.out_size < 1) throw InvalidArgument("output size must be positive");
  for (const Rect* box : {&left_iris, &right_iris}) {
    if (box->w <= 0 || box->h <= 0 || box->x < 0 || box->y < 0 || box->x + box->w > img.width() ||
        box->y + box->h > img.height())
      throw InvalidArgument("iris box lies outside the image");
  }
  // pixel centres sit at integer coordinates; box edges are continuous
  const Point2 left{left_iris.center_x() - 0.5, left_iris.center_y() - 0.5};
  const Point2 right{right_iris.center_x() - 0.5, right_iris.center_y() - 0.5};
  const double dx = right.x - left.x, dy = right.y - left.y;
  const double distance = std::hypot(dx, dy);
  if (distance < 1e-9) throw InvalidArgument("iris centres coincide; rotation and scale undefined");

  double angle = std::atan2(dy, dx);
  if (angle > std::numbers::pi / 2) angle -= std::numbers::pi;
  if (angle <= -std::numbers::pi / 2) angle += std::numbers::pi;

  AlignedEyes out;
  out.rotation_radians = -angle;
  out.scale = params.inter_iris_fraction * params.out_size / distance;
  const Point2 mid{(left.x + right.x) / 2, (left.y + right.y) / 2};
  // p' = s R(-angle) (p - mid)
  Affine2 to_aligned = Affine2::rotation_about(mid, -angle, out.scale);
  to_aligned.t.x -= mid.x;
  to_aligned.t.y -= mid.y;
  out.source_to_aligned = to_aligned;
  const Affine2 to_source = to_aligned.inverse();

  const double half = (params.out_size - 1) / 2.0;
  auto crop = [&](Point2 center, bool& padded) {
    const Point2 q = to_aligned.apply(center);
    Affine2 dst_to_src = to_source;
    // shift the crop origin: aligned = p + (q - half)
    const Point2 shift{q.x - half, q.y - half};
    dst_to_src.t = to_source.apply(shift);
    auto warped = warp(img, dst_to_src, params.out_size, params.out_size);
    padded = warped.padded;
    return std::move(warped.image);
  };
  out.left_eye = crop(left, out.left_padded);
  out.right_eye = crop(right, out.right_padded);
  return out;
}

}  // namespace periocular
