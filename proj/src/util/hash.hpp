#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace periocular::hash {

using Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> bytes);
  Sha256& update(std::string_view text);
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256_file(const std::filesystem::path& path);
std::string to_hex(const Digest& digest);

}  // namespace periocular::hash
