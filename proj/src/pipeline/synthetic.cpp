#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "periocular/error.hpp"
#include "periocular/pipeline.hpp"

namespace periocular {

namespace {

// Smooth random texture: upsampled coarse noise plus a few Gaussian blobs,
// stretched to [0.15, 0.85].
GrayImage class_texture(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  constexpr int kCoarse = 24;
  GrayImage coarse(kCoarse, kCoarse);
  for (auto& v : coarse.pixels()) v = uni(rng);
  GrayImage img = resize(coarse, size, size);

  GrayImage fine(size / 4, size / 4);
  for (auto& v : fine.pixels()) v = uni(rng);
  const GrayImage detail = resize(fine, size, size);

  struct Blob {
    double x, y, r, a;
  };
  std::vector<Blob> blobs(12);
  for (auto& b : blobs) b = {uni(rng) * size, uni(rng) * size, 4.0 + uni(rng) * size / 10.0, uni(rng) * 2.0 - 1.0};
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double v = img(x, y) + 0.5 * detail(x, y);
      for (const auto& b : blobs) {
        const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        v += b.a * std::exp(-d2 / (2.0 * b.r * b.r));
      }
      img(x, y) = v;
    }
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const double min = *lo, range = std::max(*hi - *lo, 1e-12);
  for (auto& v : img.pixels()) v = 0.15 + 0.7 * (v - min) / range;
  return img;
}

}  // namespace

std::filesystem::path make_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec) {
  if (spec.subjects < 1 || spec.images_per_class < 1 || spec.size < 32)
    throw InvalidArgument("synthetic dataset needs >= 1 subject, >= 1 image per class and size >= 32");
  if (spec.constant_classes < 0 || spec.constant_classes > 2 * spec.subjects)
    throw InvalidArgument("constant_classes exceeds the number of classes");
  std::filesystem::create_directories(dir / "images");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  const int classes = 2 * spec.subjects;
  std::ofstream manifest(dir / "manifest.csv", std::ios::binary | std::ios::trunc);
  if (!manifest) throw Error("cannot write " + (dir / "manifest.csv").string());
  manifest << "sample_id,subject_id,eye,session,eyeglasses,gaze,image_path,variant,iris_x,iris_y,iris_w,iris_h\n";

  for (int c = 0; c < classes; ++c) {
    const bool constant = c >= classes - spec.constant_classes;
    const GrayImage base = constant ? GrayImage(spec.size, spec.size, 0.5) : class_texture(spec.size, rng);
    char subject[16];
    std::snprintf(subject, sizeof(subject), "s%02d", c / 2 + 1);
    const char* eye = c % 2 == 0 ? "left" : "right";
    for (int k = 0; k < spec.images_per_class; ++k) {
      GrayImage img = base;
      if (!constant)
        for (auto& v : img.pixels()) v = std::clamp(v + noise(rng), 0.0, 1.0);
      const std::string id = std::string(subject) + "_" + eye + "_" + std::to_string(k + 1);
      const std::string rel = "images/" + id + ".png";
      write_gray(img, dir / rel);
      manifest << id << ',' << subject << ',' << eye << ",1," << (k % 2) << ",frontal," << rel << ",original,,,,\n";
    }
  }
  if (!manifest) throw Error("cannot write " + (dir / "manifest.csv").string());
  return dir / "manifest.csv";
}

}  // namespace periocular
