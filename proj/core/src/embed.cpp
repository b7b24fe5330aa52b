#include "hardneg/embed.hpp"

#include <cmath>

#include "hardneg/corpus.hpp"
#include "hardneg/util.hpp"

namespace hardneg {

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "hashing") return ProviderKind::hashing;
  if (name == "http") return ProviderKind::http;
  throw ConfigError("unknown provider kind '" + std::string(name) + "' (expected hashing|http)");
}

std::string_view to_string(ProviderKind kind) {
  return kind == ProviderKind::hashing ? "hashing" : "http";
}

void ProviderSpec::validate() const {
  if (model_id.empty()) throw ConfigError("provider model_id must not be empty");
  if (dim < 2) throw ConfigError("provider '" + model_id + "': dim must be >= 2");
  if (max_sequence_words == 0) {
    throw ConfigError("provider '" + model_id + "': max_sequence_words must be positive");
  }
  if (kind == ProviderKind::http && endpoint_url.empty()) {
    throw ConfigError("provider '" + model_id + "': http provider needs endpoint_url");
  }
  if (batch_size == 0) throw ConfigError("provider '" + model_id + "': batch_size must be positive");
}

std::vector<double> l2_normalize(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("l2_normalize: non-finite entry");
    sum += v * v;
  }
  if (sum == 0.0) throw Error("l2_normalize: zero vector has no direction");
  const double norm = std::sqrt(sum);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] / norm;
  return out;
}

EmbeddingVector hashing_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 2) throw Error("hashing_embed: dim must be >= 2");
  const auto tokens = terms(text);
  if (tokens.empty()) throw Error("hashing_embed: text has no tokens");
  std::vector<double> signed_counts(dim, 0.0);
  std::vector<double> counts(dim, 0.0);
  for (const auto& token : tokens) {
    const std::uint64_t h = hash64(token, seed);
    const std::size_t bucket = static_cast<std::size_t>(h % dim);
    signed_counts[bucket] += (h >> 63) ? -1.0 : 1.0;
    counts[bucket] += 1.0;
  }
  bool all_zero = true;
  for (double v : signed_counts) all_zero = all_zero && v == 0.0;
  EmbeddingVector out;
  out.values = l2_normalize(all_zero ? counts : signed_counts);
  out.normalized = true;
  return out;
}

std::string truncate_words(std::string_view text, std::size_t max_words) {
  std::size_t words = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    if (i >= text.size()) break;
    if (words == max_words) {
      std::size_t end = i;
      while (end > 0 && text[end - 1] == ' ') --end;
      return std::string(text.substr(0, end));
    }
    ++words;
    while (i < text.size() && text[i] != ' ') ++i;
  }
  return std::string(text);
}

std::string content_hash(std::string_view normalized_text) { return sha256_hex(normalized_text); }

HashingProvider::HashingProvider(ProviderSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind != ProviderKind::hashing) throw ConfigError("HashingProvider needs kind=hashing");
}

std::vector<std::vector<double>> HashingProvider::embed_batch(std::span<const std::string> texts) {
  std::vector<std::vector<double>> rows;
  rows.reserve(texts.size());
  for (const auto& t : texts) rows.push_back(hashing_embed(t, spec_.dim, spec_.seed).values);
  return rows;
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec) {
  if (spec.kind == ProviderKind::http) return std::make_unique<HttpProvider>(spec);
  return std::make_unique<HashingProvider>(spec);
}

std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         std::span<const std::string> texts,
                                         EmbeddingCache* cache) {
  const ProviderSpec& spec = provider.spec();
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> prepared(texts.size());
  std::vector<std::string> keys(texts.size());
  std::vector<std::size_t> missing;

  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::string normalized = normalize_text(texts[i]);
    if (normalized.empty()) {
      throw Error("cannot embed empty text (input " + std::to_string(i) + ") with model '" +
                  spec.model_id + "'");
    }
    prepared[i] = truncate_words(normalized, spec.max_sequence_words);
    keys[i] = content_hash(prepared[i]);
    if (cache) {
      if (auto hit = cache->get(spec.model_id, keys[i]); hit && hit->dim() == spec.dim) {
        out[i] = std::move(*hit);
        continue;
      }
    }
    missing.push_back(i);
  }
  if (missing.empty()) return out;

  std::vector<std::string> batch;
  batch.reserve(missing.size());
  for (std::size_t i : missing) batch.push_back(prepared[i]);
  auto rows = provider.embed_batch(batch);
  if (rows.size() != missing.size()) {
    throw ProviderError("provider '" + spec.model_id + "' returned " +
                        std::to_string(rows.size()) + " vectors for " +
                        std::to_string(missing.size()) + " texts");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = missing[r];
    if (rows[r].size() != spec.dim) {
      throw ProviderError("provider '" + spec.model_id + "' returned dim " +
                          std::to_string(rows[r].size()) + ", expected " +
                          std::to_string(spec.dim));
    }
    EmbeddingVector v;
    v.model_id = spec.model_id;
    try {
      v.values = l2_normalize(rows[r]);
    } catch (const Error& e) {
      throw ProviderError("provider '" + spec.model_id + "' input " + std::to_string(i) + ": " +
                          e.what());
    }
    v.normalized = true;
    if (cache) cache->put(spec.model_id, keys[i], v);
    out[i] = std::move(v);
  }
  return out;
}

std::vector<EmbeddingVector> embed_texts(const ProviderSpec& spec,
                                         std::span<const std::string> texts,
                                         EmbeddingCache* cache) {
  auto provider = make_provider(spec);
  return embed_texts(*provider, texts, cache);
}

void EmbeddingStore::put(const std::string& id, EmbeddingVector vector) {
  auto& table = by_model_[vector.model_id];
  table.insert_or_assign(id, std::move(vector));
}

const EmbeddingVector* EmbeddingStore::find(const std::string& model_id,
                                            const std::string& id) const {
  auto m = by_model_.find(model_id);
  if (m == by_model_.end()) return nullptr;
  auto it = m->second.find(id);
  return it == m->second.end() ? nullptr : &it->second;
}

const EmbeddingVector& EmbeddingStore::at(const std::string& model_id,
                                          const std::string& id) const {
  const auto* v = find(model_id, id);
  if (!v) throw Error("missing embedding for '" + id + "' under model '" + model_id + "'");
  return *v;
}

std::vector<std::string> EmbeddingStore::model_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : by_model_) ids.push_back(id);
  return ids;
}

std::vector<double> concat_normalized(const EmbeddingStore& store, const std::string& id,
                                      std::span<const std::string> model_ids) {
  std::vector<double> joined;
  for (const auto& model : model_ids) {
    const auto& v = store.at(model, id);
    joined.insert(joined.end(), v.values.begin(), v.values.end());
  }
  return l2_normalize(joined);
}

}  // namespace hardneg
