#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "periocular/features.hpp"

namespace periocular {

namespace {

constexpr char kMagic[4] = {'P', 'E', 'M', 'B'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 1 + 4;

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::uint32_t v, std::uint8_t* p) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

FeatureVector parse_embedding(std::span<const std::uint8_t> bytes, int expected_dims) {
  using Kind = EmbeddingError::Kind;
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw EmbeddingError(Kind::bad_magic, "embedding: bad magic (expected \"PEMB\")");
  if (bytes[4] != kVersion)
    throw EmbeddingError(Kind::bad_version, "embedding: unsupported version " + std::to_string(bytes[4]));
  const std::uint32_t dims = read_u32_le(bytes.data() + 5);
  const std::size_t payload = bytes.size() - kHeaderSize;
  if (payload != static_cast<std::size_t>(dims) * 4)
    throw EmbeddingError(Kind::length_mismatch, "embedding: header declares " + std::to_string(dims) +
                                                    " values but payload holds " +
                                                    std::to_string(payload) + " bytes");
  if (expected_dims > 0 && dims != static_cast<std::uint32_t>(expected_dims))
    throw EmbeddingError(Kind::dimension_mismatch, "embedding: expected " + std::to_string(expected_dims) +
                                                       " dims, got " + std::to_string(dims));
  FeatureVector out{"deep-" + std::to_string(dims), {}};
  out.values.resize(dims);
  double norm_sq = 0;
  for (std::uint32_t i = 0; i < dims; ++i) {
    const float v = std::bit_cast<float>(read_u32_le(bytes.data() + kHeaderSize + 4 * i));
    if (!std::isfinite(v))
      throw EmbeddingError(Kind::non_finite, "embedding: non-finite value at index " + std::to_string(i));
    out.values[i] = v;
    norm_sq += static_cast<double>(v) * v;
  }
  if (norm_sq == 0.0) throw EmbeddingError(Kind::zero_norm, "embedding: zero-norm vector");
  return out;
}

FeatureVector load_embedding(const std::filesystem::path& path, int expected_dims) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingError(EmbeddingError::Kind::unreadable, "embedding: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_embedding(bytes, expected_dims);
  } catch (const EmbeddingError& e) {
    throw EmbeddingError(e.kind(), path.filename().string() + ": " + e.what());
  }
}

void write_embedding(std::span<const float> values, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(kHeaderSize + values.size() * 4);
  std::memcpy(bytes.data(), kMagic, 4);
  bytes[4] = kVersion;
  write_u32_le(static_cast<std::uint32_t>(values.size()), bytes.data() + 5);
  for (std::size_t i = 0; i < values.size(); ++i)
    write_u32_le(std::bit_cast<std::uint32_t>(values[i]), bytes.data() + kHeaderSize + 4 * i);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace periocular
