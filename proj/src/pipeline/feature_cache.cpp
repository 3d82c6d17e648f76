// Cache entry layout (little-endian):
//   "PFC1" | u8 kind | u32 key length | key | u64 payload length | sha256(payload) | payload
// Dense payload:     u32 id length | id | u64 n | n x f64
// Keypoint payload:  u64 n | n x (4 x f64 + 128 x f32)

#include <cstring>
#include <fstream>
#include <iterator>

#include "periocular/error.hpp"
#include "periocular/pipeline.hpp"
#include "util/hash.hpp"

namespace periocular {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'C', '1'};
enum class Kind : std::uint8_t { dense = 0, keypoints = 1 };

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}
  template <typename T>
  bool get(T& v) {
    if (pos_ + sizeof(T) > data_.size()) return false;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return true;
  }
  bool get_bytes(void* out, std::size_t n) {
    if (n > data_.size() - pos_) return false;
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  std::span<const std::uint8_t> rest() const { return data_.subspan(pos_); }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

void write_entry(const std::filesystem::path& path, Kind kind, const std::string& key,
                 const std::vector<std::uint8_t>& payload) {
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put(static_cast<std::uint8_t>(kind));
  w.put(static_cast<std::uint32_t>(key.size()));
  w.put_bytes(key.data(), key.size());
  w.put(static_cast<std::uint64_t>(payload.size()));
  const auto digest = hash::sha256(payload);
  w.put_bytes(digest.data(), digest.size());
  w.put_bytes(payload.data(), payload.size());

  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache entry " + tmp.string());
    out.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
    if (!out) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Returns the payload, or nullopt with `corrupt` set when the entry is damaged.
std::optional<std::vector<std::uint8_t>> read_entry(const std::filesystem::path& path, Kind kind,
                                                    const std::string& key, bool& corrupt) {
  corrupt = false;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(bytes);
  char magic[4];
  std::uint8_t stored_kind = 0;
  std::uint32_t key_len = 0;
  std::uint64_t payload_len = 0;
  hash::Digest digest{};
  corrupt = true;
  if (!r.get_bytes(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) return std::nullopt;
  if (!r.get(stored_kind) || stored_kind != static_cast<std::uint8_t>(kind)) return std::nullopt;
  if (!r.get(key_len)) return std::nullopt;
  std::string stored_key(key_len, '\0');
  if (!r.get_bytes(stored_key.data(), key_len) || stored_key != key) return std::nullopt;
  if (!r.get(payload_len) || !r.get_bytes(digest.data(), digest.size())) return std::nullopt;
  auto payload = r.rest();
  if (payload.size() != payload_len || hash::sha256(payload) != digest) return std::nullopt;
  corrupt = false;
  return std::vector<std::uint8_t>(payload.begin(), payload.end());
}

}  // namespace

FeatureCache::FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path FeatureCache::entry_path(const std::string& sample_id, const std::string& extractor_id,
                                               const std::string& key) const {
  return dir_ / sanitize(extractor_id) / (sanitize(sample_id) + "-" + key.substr(0, 16) + ".bin");
}

FeatureCache::Lookup FeatureCache::load(const std::string& sample_id, const std::string& extractor_id,
                                        const std::string& key, FeatureVector& out) const {
  bool corrupt = false;
  auto payload = read_entry(entry_path(sample_id, extractor_id, key), Kind::dense, key, corrupt);
  if (!payload) return corrupt ? Lookup::corrupt : Lookup::miss;
  Reader r(*payload);
  std::uint32_t id_len = 0;
  std::uint64_t n = 0;
  FeatureVector fv;
  if (!r.get(id_len)) return Lookup::corrupt;
  fv.extractor_id.resize(id_len);
  if (!r.get_bytes(fv.extractor_id.data(), id_len) || !r.get(n)) return Lookup::corrupt;
  if (n > r.rest().size() / sizeof(double)) return Lookup::corrupt;
  fv.values.resize(n);
  if (!r.get_bytes(fv.values.data(), n * sizeof(double)) || !r.done()) return Lookup::corrupt;
  out = std::move(fv);
  return Lookup::hit;
}

FeatureCache::Lookup FeatureCache::load(const std::string& sample_id, const std::string& extractor_id,
                                        const std::string& key, KeypointSet& out) const {
  bool corrupt = false;
  auto payload = read_entry(entry_path(sample_id, extractor_id, key), Kind::keypoints, key, corrupt);
  if (!payload) return corrupt ? Lookup::corrupt : Lookup::miss;
  Reader r(*payload);
  std::uint64_t n = 0;
  if (!r.get(n)) return Lookup::corrupt;
  KeypointSet ks;
  constexpr std::size_t kRecord = 4 * sizeof(double) + 128 * sizeof(float);
  if (n > r.rest().size() / kRecord) return Lookup::corrupt;
  ks.keypoints.resize(n);
  for (auto& kp : ks.keypoints) {
    if (!r.get(kp.x) || !r.get(kp.y) || !r.get(kp.scale) || !r.get(kp.orientation) ||
        !r.get_bytes(kp.descriptor.data(), 128 * sizeof(float)))
      return Lookup::corrupt;
  }
  if (!r.done()) return Lookup::corrupt;
  out = std::move(ks);
  return Lookup::hit;
}

void FeatureCache::store(const std::string& sample_id, const std::string& extractor_id, const std::string& key,
                         const FeatureVector& value) const {
  Writer w;
  w.put(static_cast<std::uint32_t>(value.extractor_id.size()));
  w.put_bytes(value.extractor_id.data(), value.extractor_id.size());
  w.put(static_cast<std::uint64_t>(value.values.size()));
  w.put_bytes(value.values.data(), value.values.size() * sizeof(double));
  write_entry(entry_path(sample_id, extractor_id, key), Kind::dense, key, w.bytes);
}

void FeatureCache::store(const std::string& sample_id, const std::string& extractor_id, const std::string& key,
                         const KeypointSet& value) const {
  Writer w;
  w.put(static_cast<std::uint64_t>(value.keypoints.size()));
  for (const auto& kp : value.keypoints) {
    w.put(kp.x);
    w.put(kp.y);
    w.put(kp.scale);
    w.put(kp.orientation);
    w.put_bytes(kp.descriptor.data(), 128 * sizeof(float));
  }
  write_entry(entry_path(sample_id, extractor_id, key), Kind::keypoints, key, w.bytes);
}

}  // namespace periocular
