#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hardneg {

struct EmbeddingVector {
  std::string model_id;
  std::vector<double> values;
  bool normalized = false;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

enum class ProviderKind { hashing, http };

struct ProviderSpec {
  std::string model_id;
  ProviderKind kind = ProviderKind::hashing;
  std::size_t dim = 256;
  std::string endpoint_url;  // http only
  std::size_t max_sequence_words = 512;
  std::uint64_t seed = 0;      // hashing only
  std::size_t batch_size = 32;  // http only

  void validate() const;  // throws ConfigError
};

ProviderKind parse_provider_kind(std::string_view name);
std::string_view to_string(ProviderKind kind);

// Unit-norm copy; throws on a zero or non-finite vector.
std::vector<double> l2_normalize(std::span<const double> values);

// Signed feature hashing of case-folded tokens into `dim` buckets, then L2
// normalized. If the signs cancel to the zero vector the unsigned counts are
// used instead. Throws when `text` has no tokens or dim < 2.
EmbeddingVector hashing_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

// First `max_words` whitespace tokens of normalized text.
std::string truncate_words(std::string_view text, std::size_t max_words);

// Key for the embedding cache: sha256 of the normalized text bytes.
std::string content_hash(std::string_view normalized_text);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const ProviderSpec& spec() const noexcept = 0;
  // Raw (not necessarily normalized) rows, one per text, in order.
  virtual std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) = 0;
};

class HashingProvider final : public EmbeddingProvider {
 public:
  explicit HashingProvider(ProviderSpec spec);
  const ProviderSpec& spec() const noexcept override { return spec_; }
  std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) override;

 private:
  ProviderSpec spec_;
};

/// POSTs {"model", "texts"} to the endpoint and expects {"vectors": [[...]]}.
class HttpProvider final : public EmbeddingProvider {
 public:
  explicit HttpProvider(ProviderSpec spec);
  const ProviderSpec& spec() const noexcept override { return spec_; }
  std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) override;

 private:
  ProviderSpec spec_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec);

/// Append-only on-disk cache keyed by (model_id, content_hash). Records carry
/// a checksum. A bad tail gets a warning and is truncated away; callers then
/// recompute what was lost. Concurrent readers, exclusive writers.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path file);

  std::optional<EmbeddingVector> get(const std::string& model_id,
                                     const std::string& content_hash) const;
  void put(const std::string& model_id, const std::string& content_hash,
           const EmbeddingVector& vector);

  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return file_; }

 private:
  void load();

  std::filesystem::path file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, EmbeddingVector> entries_;
};

// One normalized vector per text, in input order. Texts are normalized and
// truncated to the provider's max_sequence_words; empty texts are rejected.
std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         std::span<const std::string> texts,
                                         EmbeddingCache* cache = nullptr);
std::vector<EmbeddingVector> embed_texts(const ProviderSpec& spec,
                                         std::span<const std::string> texts,
                                         EmbeddingCache* cache = nullptr);

/// Per-model vectors for a set of ids (documents or queries).
class EmbeddingStore {
 public:
  void put(const std::string& id, EmbeddingVector vector);
  const EmbeddingVector* find(const std::string& model_id, const std::string& id) const;
  const EmbeddingVector& at(const std::string& model_id, const std::string& id) const;
  std::vector<std::string> model_ids() const;
  bool empty() const noexcept { return by_model_.empty(); }

 private:
  std::map<std::string, std::unordered_map<std::string, EmbeddingVector>> by_model_;
};

// Per-model vectors concatenated in model_id order and re-normalized: the
// shared feature space for clustering and the re-ranker.
std::vector<double> concat_normalized(const EmbeddingStore& store, const std::string& id,
                                      std::span<const std::string> model_ids);

}  // namespace hardneg
