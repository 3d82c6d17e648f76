#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "oracles.hpp"
#include "periocular/features.hpp"
#include "test_support.hpp"

using namespace periocular;
using periocular::testing::random_image;

namespace {

std::vector<double> slice(const FeatureVector& f, std::size_t start, std::size_t n) {
  return {f.values.begin() + static_cast<std::ptrdiff_t>(start), f.values.begin() + static_cast<std::ptrdiff_t>(start + n)};
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "bin " << i;
}

GrayImage affine_map(GrayImage img, double scale, double offset) {
  for (auto& v : img.pixels()) v = v * scale + offset;
  return img;
}

double sum_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

// --- LBP

TEST(Lbp, UniformTableHas58UniformBins) {
  const auto& t = lbp_uniform_table();
  int uniform = 0;
  for (int c = 0; c < 256; ++c) {
    EXPECT_EQ(t[static_cast<std::size_t>(c)], oracle::u2_bin(c));
    uniform += oracle::is_uniform(c);
  }
  EXPECT_EQ(uniform, 58);
}

TEST(Lbp, ConstantPatchesAreOneHotAtAllOnes) {
  const auto grid = tile_patches(GrayImage(256, 256, 0.4), 4, 4);
  const auto f = extract_lbp(grid);
  ASSERT_EQ(f.dims(), 944u);
  EXPECT_EQ(f.extractor_id, "lbp-u2-8-1");
  const int all_ones = lbp_uniform_table()[255];
  for (std::size_t p = 0; p < 16; ++p)
    for (int b = 0; b < kLbpUniformBins; ++b)
      EXPECT_EQ(f.values[p * 59 + static_cast<std::size_t>(b)], b == all_ones ? 1.0 : 0.0);
}

TEST(Lbp, MatchesNaiveLoop) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto patch = random_image(64, 64, 100 + seed);
    PatchGrid grid{{patch}, 1, 1};
    expect_close(extract_lbp(grid).values, oracle::lbp_histogram(patch), 1e-12);
  }
}

TEST(Lbp, DimsAndNormalisationOnAnyImage) {
  const auto f = extract_lbp(tile_patches(random_image(256, 256, 7), 4, 4));
  ASSERT_EQ(f.dims(), 944u);
  for (std::size_t p = 0; p < 16; ++p) EXPECT_NEAR(sum_of(slice(f, p * 59, 59)), 1.0, 1e-9);
}

TEST(Lbp, InvariantToPositiveAffineIntensityMaps) {
  const auto img = random_image(64, 64, 8);
  PatchGrid a{{img}, 1, 1}, b{{affine_map(img, 0.5, 0.25)}, 1, 1};
  EXPECT_EQ(extract_lbp(a).values, extract_lbp(b).values);
}

TEST(Lbp, LargerRadiusChangesIdAndNeedsRoom) {
  LbpParams p{2.0};
  EXPECT_EQ(p.id(), "lbp-u2-8-2");
  EXPECT_EQ(lbp_codes(random_image(9, 9, 1), p).size(), 25u);
  EXPECT_THROW(lbp_codes(GrayImage(2, 2), {}), InvalidArgument);
}

// --- LPQ

TEST(Lpq, DimsOnFourByFourGrid) {
  const auto f = extract_lpq(tile_patches(random_image(256, 256, 9), 4, 4));
  ASSERT_EQ(f.dims(), 4096u);
  EXPECT_EQ(f.extractor_id, "lpq-7");
  for (std::size_t p = 0; p < 16; ++p) EXPECT_NEAR(sum_of(slice(f, p * 256, 256)), 1.0, 1e-9);
}

TEST(Lpq, ConstantPatchIsOneHot) {
  PatchGrid grid{{GrayImage(64, 64, 0.7)}, 1, 1};
  const auto f = extract_lpq(grid);
  int nonzero = 0;
  for (double v : f.values) nonzero += v != 0.0;
  EXPECT_EQ(nonzero, 1);
  EXPECT_DOUBLE_EQ(sum_of(f.values), 1.0);
}

TEST(Lpq, MatchesDirectWindowedDft) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto patch = random_image(64, 64, 200 + seed);
    PatchGrid grid{{patch}, 1, 1};
    expect_close(extract_lpq(grid).values, oracle::lpq_histogram(patch), 1e-12);
  }
}

TEST(Lpq, InvariantToPositiveScaling) {
  const auto img = random_image(64, 64, 10);
  PatchGrid a{{img}, 1, 1}, b{{affine_map(img, 0.5, 0.0)}, 1, 1};
  EXPECT_EQ(extract_lpq(a).values, extract_lpq(b).values);
}

TEST(Lpq, WhiteningIsOptionalAndNormalised) {
  LpqParams p;
  p.decorrelate = true;
  EXPECT_EQ(p.id(), "lpq-7-w");
  PatchGrid grid{{random_image(64, 64, 11)}, 1, 1};
  const auto f = extract_lpq(grid, p);
  EXPECT_NEAR(sum_of(f.values), 1.0, 1e-9);
  EXPECT_NE(f.values, extract_lpq(grid).values);
}

TEST(Lpq, PatchSmallerThanWindowIsAnError) {
  PatchGrid grid{{GrayImage(6, 6)}, 1, 1};
  EXPECT_THROW(extract_lpq(grid), InvalidArgument);
}

// --- HOG

TEST(Hog, DimensionIs72900) {
  EXPECT_EQ(hog_dimension({}, 256), 72900u);
  const auto f = extract_hog(random_image(256, 256, 12));
  EXPECT_EQ(f.dims(), 72900u);
  for (double v : f.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Hog, ConstantImageGivesZeroVector) {
  const auto f = extract_hog(GrayImage(256, 256, 0.3));
  for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(Hog, VerticalStepEdgeEnergyInHorizontalGradientBin) {
  GrayImage img(256, 256, 0.2);
  for (int y = 0; y < 256; ++y)
    for (int x = 131; x < 256; ++x) img(x, y) = 0.8;
  const auto f = extract_hog(img);
  // bin 0 holds gradients pointing along x (0 degrees)
  double total = 0, bin0 = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    total += f.values[i] * f.values[i];
    if (i % 9 == 0) bin0 += f.values[i] * f.values[i];
  }
  ASSERT_GT(total, 0.0);
  EXPECT_GE(bin0 / total, 0.9);
}

TEST(Hog, InvariantToAddingAConstant) {
  const auto img = affine_map(random_image(128, 128, 13), 0.6, 0.0);
  const auto a = extract_hog(img), b = extract_hog(affine_map(img, 1.0, 0.3));
  ASSERT_EQ(a.dims(), b.dims());
  for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_NEAR(a.values[i], b.values[i], 1e-9);
}

TEST(Hog, NonSquareOrEmptyIsAnError) {
  EXPECT_THROW(extract_hog(GrayImage()), InvalidArgument);
  EXPECT_THROW(extract_hog(GrayImage(100, 50)), InvalidArgument);
}

// --- SIFT

TEST(Sift, ConstantImageHasNoKeypoints) { EXPECT_TRUE(extract_sift(GrayImage(128, 128, 0.5)).empty()); }

TEST(Sift, DetectsGaussianBlob) {
  const double cx = 100.3, cy = 80.7, sigma = 6.0;
  GrayImage img(200, 200);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 200; ++x)
      img(x, y) = 0.2 + 0.6 * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * sigma * sigma));
  const auto ks = extract_sift(img);
  ASSERT_FALSE(ks.empty());
  const double radius = sigma * std::sqrt(2.0);
  bool found = false;
  for (const auto& k : ks.keypoints)
    found |= std::hypot(k.x - cx, k.y - cy) <= 3.0 && k.scale >= radius / 2 && k.scale <= radius * 2;
  EXPECT_TRUE(found);
}

TEST(Sift, DescriptorsAreUnitNorm) {
  const auto ks = extract_sift(resize(random_image(12, 12, 14), 96, 96));
  ASSERT_FALSE(ks.empty());
  for (const auto& k : ks.keypoints) {
    double n = 0;
    for (float v : k.descriptor) n += static_cast<double>(v) * v;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
    for (float v : k.descriptor) EXPECT_GE(v, 0.0f);
  }
}

TEST(Sift, DeterministicAndSizeChecked) {
  const auto img = random_image(64, 64, 15);
  EXPECT_EQ(extract_sift(img), extract_sift(img));
  EXPECT_THROW(extract_sift(GrayImage(31, 64)), InvalidArgument);
}

// --- MB-TLBP

TEST(Mbtlbp, ConstantImageIsOneHotPerRegion) {
  const auto f = extract_mbtlbp(GrayImage(256, 256, 0.6));
  ASSERT_EQ(f.dims(), 4096u);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t b = 0; b < 256; ++b) EXPECT_EQ(f.values[r * 256 + b], b == 255 ? 1.0 : 0.0);
}

TEST(Mbtlbp, BlockOneMatchesNaiveLoop) {
  const auto img = random_image(64, 64, 16);
  expect_close(extract_mbtlbp(img, {1, 4, 4}).values, oracle::mbtlbp_histograms(img, 1), 1e-12);
}

TEST(Mbtlbp, DefaultBlockMatchesNaiveLoop) {
  const auto img = random_image(64, 64, 17);
  expect_close(extract_mbtlbp(img).values, oracle::mbtlbp_histograms(img, 3), 1e-12);
}

TEST(Mbtlbp, UndersizedImageIsAnError) { EXPECT_THROW(extract_mbtlbp(GrayImage(8, 20)), InvalidArgument); }

// --- embeddings

namespace {

std::vector<std::uint8_t> embedding_bytes(const std::vector<float>& v, std::uint32_t declared, std::uint8_t version = 1) {
  std::vector<std::uint8_t> b = {'P', 'E', 'M', 'B', version};
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(declared >> (8 * i)));
  for (float f : v) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return b;
}

EmbeddingError::Kind kind_of(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_embedding(bytes);
  } catch (const EmbeddingError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an embedding error";
  return EmbeddingError::Kind::unreadable;
}

}  // namespace

TEST(Embedding, WellFormedFileLoads) {
  const auto dir = periocular::testing::scratch_dir("embedding");
  std::vector<float> v(256);
  for (int i = 0; i < 256; ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(std::sin(i));
  write_embedding(v, dir / "e.pemb");
  const auto f = load_embedding(dir / "e.pemb");
  EXPECT_EQ(f.dims(), 256u);
  EXPECT_EQ(f.extractor_id, "deep-256");
  for (int i = 0; i < 256; ++i) EXPECT_EQ(f.values[static_cast<std::size_t>(i)], static_cast<double>(v[static_cast<std::size_t>(i)]));
  EXPECT_EQ(parse_embedding(embedding_bytes(v, 256)), f);
}

TEST(Embedding, DistinctErrorsPerDefect) {
  std::vector<float> ok(256, 0.5f);
  auto bad_magic = embedding_bytes(ok, 256);
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of(bad_magic), EmbeddingError::Kind::bad_magic);
  EXPECT_EQ(kind_of(embedding_bytes(ok, 256, 2)), EmbeddingError::Kind::bad_version);
  auto truncated = embedding_bytes(ok, 256);
  truncated.pop_back();
  EXPECT_EQ(kind_of(truncated), EmbeddingError::Kind::length_mismatch);
  EXPECT_EQ(kind_of(embedding_bytes(std::vector<float>(128, 0.5f), 128)), EmbeddingError::Kind::dimension_mismatch);
  auto nan = ok;
  nan[3] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_EQ(kind_of(embedding_bytes(nan, 256)), EmbeddingError::Kind::non_finite);
  EXPECT_EQ(kind_of(embedding_bytes(std::vector<float>(256, 0.0f), 256)), EmbeddingError::Kind::zero_norm);
  EXPECT_THROW(load_embedding("/nonexistent/e.pemb"), EmbeddingError);
}
