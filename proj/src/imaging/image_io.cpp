#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

#include "periocular/error.hpp"
#include "periocular/imaging.hpp"

namespace periocular {

namespace {

RgbImage from_bgr(const cv::Mat& bgr) {
  RgbImage out{bgr.cols, bgr.rows, {}};
  out.rgb.resize(static_cast<std::size_t>(bgr.cols) * bgr.rows * 3);
  std::size_t i = 0;
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      out.rgb[i++] = row[x][2];
      out.rgb[i++] = row[x][1];
      out.rgb[i++] = row[x][0];
    }
  }
  return out;
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw FormatError("cannot decode image " + path.string());
  return from_bgr(bgr);
}

RgbImage decode_rgb(std::span<const std::uint8_t> encoded) {
  cv::Mat buf(1, static_cast<int>(encoded.size()), CV_8U, const_cast<std::uint8_t*>(encoded.data()));
  cv::Mat bgr = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (bgr.empty()) throw FormatError("cannot decode image buffer");
  return from_bgr(bgr);
}

GrayImage read_gray(const std::filesystem::path& path, IntensityMode mode) {
  return to_grayscale(read_rgb(path), mode);
}

void write_gray(const GrayImage& img, const std::filesystem::path& path) {
  if (img.empty()) throw InvalidArgument("cannot write an empty image");
  cv::Mat mat(img.height(), img.width(), CV_8U);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width(); ++x)
      row[x] = static_cast<std::uint8_t>(std::lround(std::clamp(img(x, y), 0.0, 1.0) * 255.0));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), mat)) throw Error("cannot write image " + path.string());
}

}  // namespace periocular
