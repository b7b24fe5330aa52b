#include <bit>
#include <cstring>
#include <fstream>
#include <mutex>

#include "hardneg/embed.hpp"
#include "hardneg/util.hpp"

namespace hardneg {

static_assert(std::endian::native == std::endian::little,
              "embedding cache records are little-endian");

namespace {

// Record layout:
//   "HNEC" | u32 model_len | model | u32 key_len | key | u32 dim | f64[dim] | u64 checksum
// The checksum is hash64 over every preceding byte of the record.
constexpr char kMagic[4] = {'H', 'N', 'E', 'C'};
constexpr std::uint32_t kMaxModelLen = 4096;
constexpr std::uint32_t kMaxKeyLen = 256;
constexpr std::uint32_t kMaxDim = 1u << 20;

std::string entry_key(const std::string& model_id, const std::string& hash) {
  return model_id + '\x1f' + hash;
}

template <typename T>
void put_raw(std::string& out, const T& value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

class Reader {
 public:
  Reader(std::string_view data, std::size_t pos) : data_(data), pos_(pos) {}
  template <typename T>
  bool read(T& value) {
    if (pos_ + sizeof(T) > data_.size()) return false;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return true;
  }
  bool read_bytes(std::size_t n, std::string& out) {
    if (pos_ + n > data_.size()) return false;
    out.assign(data_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_;
};

std::string encode(const std::string& model_id, const std::string& hash,
                   const EmbeddingVector& vector) {
  std::string rec(kMagic, sizeof(kMagic));
  put_raw(rec, static_cast<std::uint32_t>(model_id.size()));
  rec += model_id;
  put_raw(rec, static_cast<std::uint32_t>(hash.size()));
  rec += hash;
  put_raw(rec, static_cast<std::uint32_t>(vector.values.size()));
  for (double v : vector.values) put_raw(rec, v);
  put_raw(rec, hash64(rec, 0));
  return rec;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  load();
}

void EmbeddingCache::load() {
  if (!std::filesystem::exists(file_)) return;
  const std::string data = read_file(file_);
  std::size_t good = 0;
  while (good < data.size()) {
    Reader r(data, good);
    std::string magic, model, key;
    std::uint32_t model_len = 0, key_len = 0, dim = 0;
    bool ok = r.read_bytes(4, magic) && magic == std::string_view(kMagic, 4) &&
              r.read(model_len) && model_len <= kMaxModelLen && r.read_bytes(model_len, model) &&
              r.read(key_len) && key_len <= kMaxKeyLen && r.read_bytes(key_len, key) &&
              r.read(dim) && dim >= 1 && dim <= kMaxDim;
    EmbeddingVector v;
    if (ok) {
      v.values.resize(dim);
      for (auto& x : v.values) ok = ok && r.read(x);
    }
    std::uint64_t checksum = 0;
    ok = ok && r.read(checksum) &&
         checksum == hash64(std::string_view(data).substr(good, r.pos() - good - 8), 0);
    if (!ok) {
      log::warn("embedding cache " + file_.string() + ": corrupt or truncated entry at byte " +
                std::to_string(good) + "; dropping the remainder, affected vectors are recomputed");
      std::filesystem::resize_file(file_, good);
      break;
    }
    v.model_id = model;
    v.normalized = true;
    entries_.insert_or_assign(entry_key(model, key), std::move(v));
    good = r.pos();
  }
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& model_id,
                                                   const std::string& content_hash) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(entry_key(model_id, content_hash));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(const std::string& model_id, const std::string& content_hash,
                         const EmbeddingVector& vector) {
  std::unique_lock lock(mutex_);
  const auto key = entry_key(model_id, content_hash);
  if (auto it = entries_.find(key); it != entries_.end() && it->second.values == vector.values) {
    return;
  }
  const std::string record = encode(model_id, content_hash, vector);
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to embedding cache " + file_.string());
  out.write(record.data(), static_cast<std::streamsize>(record.size()));
  if (!out) throw Error("short write to embedding cache " + file_.string());
  EmbeddingVector stored = vector;
  stored.model_id = model_id;
  entries_.insert_or_assign(key, std::move(stored));
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace hardneg
