#include "periocular/error.hpp"
#include "periocular/features.hpp"

namespace periocular {

std::string MbtlbpParams::id() const {
  return "mbtlbp-" + std::to_string(block) + "x" + std::to_string(block) + "-r" +
         std::to_string(region_rows) + "x" + std::to_string(region_cols);
}

GrayImage block_average(const GrayImage& img, int block) {
  if (block < 1) throw InvalidArgument("block size must be positive");
  const int pw = img.width() / block, ph = img.height() / block;
  GrayImage pooled(pw, ph);
  const double inv = 1.0 / (static_cast<double>(block) * block);
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      double sum = 0;
      for (int dy = 0; dy < block; ++dy)
        for (int dx = 0; dx < block; ++dx) sum += img(x * block + dx, y * block + dy);
      pooled(x, y) = sum * inv;
    }
  }
  return pooled;
}

std::vector<int> mbtlbp_codes(const GrayImage& pooled) {
  if (pooled.width() < 3 || pooled.height() < 3)
    throw InvalidArgument("pooled image must be at least 3x3");
  // circular neighbour order: E, NE, N, NW, W, SW, S, SE
  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  std::vector<int> codes;
  codes.reserve(static_cast<std::size_t>(pooled.width() - 2) * (pooled.height() - 2));
  double n[8];
  for (int y = 1; y < pooled.height() - 1; ++y) {
    for (int x = 1; x < pooled.width() - 1; ++x) {
      for (int i = 0; i < 8; ++i) n[i] = pooled(x + kDx[i], y + kDy[i]);
      int code = 0;
      for (int i = 0; i < 8; ++i)
        if (n[(i + 1) % 8] >= n[i]) code |= 1 << i;
      codes.push_back(code);
    }
  }
  return codes;
}

FeatureVector extract_mbtlbp(const GrayImage& img, const MbtlbpParams& params) {
  if (params.block < 1 || params.region_rows < 1 || params.region_cols < 1)
    throw InvalidArgument("invalid MB-TLBP parameters");
  if (img.width() < 3 * params.block || img.height() < 3 * params.block)
    throw InvalidArgument("image of " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " is smaller than 3 blocks of " +
                          std::to_string(params.block) + " px");
  const GrayImage pooled = block_average(img, params.block);
  const auto codes = mbtlbp_codes(pooled);
  const int cw = pooled.width() - 2, ch = pooled.height() - 2;

  FeatureVector out{params.id(), {}};
  const auto regions = static_cast<std::size_t>(params.region_rows) * params.region_cols;
  out.values.assign(regions * 256, 0.0);
  for (int y = 0; y < ch; ++y) {
    const int ry = y * params.region_rows / ch;
    for (int x = 0; x < cw; ++x) {
      const int rx = x * params.region_cols / cw;
      const auto region = static_cast<std::size_t>(ry) * params.region_cols + rx;
      out.values[region * 256 + static_cast<std::size_t>(codes[static_cast<std::size_t>(y) * cw + x])] += 1.0;
    }
  }
  for (std::size_t r = 0; r < regions; ++r) l1_normalize(std::span(out.values.data() + r * 256, 256));
  return out;
}

}  // namespace periocular
