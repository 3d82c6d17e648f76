#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "periocular/error.hpp"
#include "periocular/features.hpp"
#include "util/csv.hpp"

namespace periocular {

namespace {

struct NeighbourTap {
  int x0 = 0, y0 = 0;
  double fx = 0, fy = 0;
};

std::array<NeighbourTap, 8> neighbour_taps(double radius) {
  std::array<NeighbourTap, 8> taps{};
  for (int p = 0; p < 8; ++p) {
    const double angle = 2.0 * std::numbers::pi * p / 8.0;
    double dx = radius * std::cos(angle);
    double dy = -radius * std::sin(angle);
    if (std::abs(dx - std::round(dx)) < 1e-6) dx = std::round(dx);
    if (std::abs(dy - std::round(dy)) < 1e-6) dy = std::round(dy);
    const double fx0 = std::floor(dx), fy0 = std::floor(dy);
    taps[static_cast<std::size_t>(p)] = {static_cast<int>(fx0), static_cast<int>(fy0), dx - fx0, dy - fy0};
  }
  return taps;
}

}  // namespace

std::string LbpParams::id() const { return "lbp-u2-8-" + csv::format_double(radius); }

void l1_normalize(std::span<double> hist) {
  const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
  if (total <= 0.0) return;
  for (auto& v : hist) v /= total;
}

const std::array<int, 256>& lbp_uniform_table() {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    int next = 0;
    for (unsigned code = 0; code < 256; ++code) {
      const auto rotated = static_cast<std::uint8_t>((code << 1) | (code >> 7));
      const int transitions = std::popcount(static_cast<unsigned>(static_cast<std::uint8_t>(code) ^ rotated));
      t[code] = transitions <= 2 ? next++ : kLbpUniformBins - 1;
    }
    return t;
  }();
  return table;
}

std::vector<int> lbp_codes(const GrayImage& patch, const LbpParams& params) {
  if (params.radius <= 0) throw InvalidArgument("LBP radius must be positive");
  const int border = static_cast<int>(std::ceil(params.radius - 1e-9));
  if (patch.width() < 2 * border + 1 || patch.height() < 2 * border + 1)
    throw InvalidArgument("patch of " + std::to_string(patch.width()) + "x" +
                          std::to_string(patch.height()) + " is too small for LBP radius " +
                          csv::format_double(params.radius));
  const auto taps = neighbour_taps(params.radius);
  std::vector<int> codes;
  codes.reserve(static_cast<std::size_t>((patch.width() - 2 * border) * (patch.height() - 2 * border)));
  for (int y = border; y < patch.height() - border; ++y) {
    for (int x = border; x < patch.width() - border; ++x) {
      const double center = patch(x, y);
      int code = 0;
      for (int p = 0; p < 8; ++p) {
        const auto& t = taps[static_cast<std::size_t>(p)];
        const int px = x + t.x0, py = y + t.y0;
        double v = patch(px, py);
        if (t.fx != 0.0) v += t.fx * (patch(px + 1, py) - patch(px, py));
        if (t.fy != 0.0) v += t.fy * (patch(px, py + 1) - patch(px, py));
        if (t.fx != 0.0 && t.fy != 0.0)
          v += t.fx * t.fy * (patch(px, py) - patch(px + 1, py) - patch(px, py + 1) + patch(px + 1, py + 1));
        if (v >= center) code |= 1 << p;
      }
      codes.push_back(code);
    }
  }
  return codes;
}

FeatureVector extract_lbp(const PatchGrid& grid, const LbpParams& params) {
  if (grid.patches.empty()) throw InvalidArgument("empty patch grid");
  const auto& table = lbp_uniform_table();
  FeatureVector out{params.id(), {}};
  out.values.assign(grid.patches.size() * kLbpUniformBins, 0.0);
  for (std::size_t i = 0; i < grid.patches.size(); ++i) {
    std::span<double> hist(out.values.data() + i * kLbpUniformBins, kLbpUniformBins);
    for (int code : lbp_codes(grid.patches[i], params)) hist[static_cast<std::size_t>(table[static_cast<std::size_t>(code)])] += 1.0;
    l1_normalize(hist);
  }
  return out;
}

}  // namespace periocular
