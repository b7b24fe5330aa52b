#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "hardneg/embed.hpp"
#include "hardneg/ensemble.hpp"
#include "hardneg/util.hpp"
#include "test_support.hpp"

namespace hardneg {
namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ProviderSpec hashing_spec(std::size_t dim = 64, std::uint64_t seed = 0) {
  ProviderSpec s;
  s.model_id = "hash";
  s.dim = dim;
  s.seed = seed;
  return s;
}

TEST(L2Normalize, ThreeFour) {
  const auto v = l2_normalize(std::vector<double>{3.0, 4.0});
  EXPECT_NEAR(v[0], 0.6, 1e-12);
  EXPECT_NEAR(v[1], 0.8, 1e-12);
}

TEST(L2Normalize, UnitVectorUnchanged) {
  const std::vector<double> u = {0.0, 1.0, 0.0};
  EXPECT_EQ(l2_normalize(u), u);
}

TEST(L2Normalize, ZeroRejected) {
  EXPECT_THROW(l2_normalize(std::vector<double>{0.0, 0.0}), Error);
  EXPECT_THROW(l2_normalize(std::vector<double>{NAN, 1.0}), Error);
}

TEST(L2Normalize, NormIsOne) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(1 + rng.index(30));
    for (auto& x : v) x = rng.normal() * 100.0;
    ASSERT_NEAR(norm(l2_normalize(v)), 1.0, 1e-9);
  }
}

TEST(HashingEmbed, TermFrequencyScaleRemoved) {
  EXPECT_EQ(hashing_embed("a a", 8, 0), hashing_embed("a", 8, 0));
}

TEST(HashingEmbed, Deterministic) {
  EXPECT_EQ(hashing_embed("b", 8, 0), hashing_embed("b", 8, 0));
  EXPECT_EQ(hashing_embed("some Longer text", 32, 5), hashing_embed("some Longer text", 32, 5));
}

TEST(HashingEmbed, CaseFolded) {
  EXPECT_EQ(hashing_embed("VCN", 16, 1).values, hashing_embed("vcn", 16, 1).values);
}

TEST(HashingEmbed, DisjointBucketsGiveZeroCosine) {
  // Find two words whose buckets differ for this seed, by brute force.
  const std::size_t dim = 16;
  auto bucket = [&](const std::string& w) {
    const auto v = hashing_embed(w, dim, 3).values;
    for (std::size_t i = 0; i < dim; ++i) {
      if (v[i] != 0.0) return i;
    }
    return dim;
  };
  const std::string a = "alpha";
  std::string b;
  for (const char* candidate : {"beta", "gamma", "delta", "epsilon", "zeta", "eta"}) {
    if (bucket(candidate) != bucket(a)) {
      b = candidate;
      break;
    }
  }
  ASSERT_FALSE(b.empty());
  EXPECT_EQ(cosine(hashing_embed(a, dim, 3), hashing_embed(b, dim, 3)), 0.0);
}

TEST(HashingEmbed, SelfCosineIsExactlyOne) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    std::string text;
    for (std::size_t w = 0, n = 1 + rng.index(30); w < n; ++w) {
      text += "w" + std::to_string(rng.index(50)) + " ";
    }
    const std::size_t dim = 2 + rng.index(300);
    const auto v = hashing_embed(text, dim, rng.next());
    double dot = 0.0;
    for (double x : v.values) dot += x * x;
    ASSERT_NEAR(dot, 1.0, 1e-12);
    ASSERT_EQ(cosine(v, v), 1.0);
  }
}

TEST(HashingEmbed, RejectsNoTokensAndTinyDim) {
  EXPECT_THROW(hashing_embed("", 8, 0), Error);
  EXPECT_THROW(hashing_embed("...", 8, 0), Error);
  EXPECT_THROW(hashing_embed("a", 1, 0), Error);
}

TEST(TruncateWords, KeepsPrefix) {
  EXPECT_EQ(truncate_words("a b c d", 2), "a b");
  EXPECT_EQ(truncate_words("a b", 10), "a b");
}

TEST(EmbedTexts, TruncatesToMaxSequenceWords) {
  std::string long_text, prefix;
  for (int i = 0; i < 10000; ++i) {
    const std::string w = "w" + std::to_string(i);
    long_text += w + ' ';
    if (i < 512) prefix += w + ' ';
  }
  auto spec = hashing_spec(256);
  spec.max_sequence_words = 512;
  const auto a = embed_texts(spec, std::vector<std::string>{long_text});
  const auto b = embed_texts(spec, std::vector<std::string>{prefix});
  EXPECT_EQ(a[0].values, b[0].values);
}

TEST(EmbedTexts, EmptyTextRejected) {
  EXPECT_THROW(embed_texts(hashing_spec(), std::vector<std::string>{""}), Error);
  EXPECT_THROW(embed_texts(hashing_spec(), std::vector<std::string>{" \t "}), Error);
}

TEST(EmbedTexts, OrderPreservedAndNormalized) {
  const std::vector<std::string> texts = {"first text", "second one", "third", "first text"};
  const auto out = embed_texts(hashing_spec(), texts);
  ASSERT_EQ(out.size(), texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto direct = hashing_embed(texts[i], 64, 0).values;
    for (std::size_t d = 0; d < direct.size(); ++d) EXPECT_NEAR(out[i].values[d], direct[d], 1e-15);
    EXPECT_TRUE(out[i].normalized);
    EXPECT_EQ(out[i].model_id, "hash");
    EXPECT_NEAR(norm(out[i].values), 1.0, 1e-6);
  }
}

TEST(ProviderSpec, Validation) {
  auto s = hashing_spec(1);
  EXPECT_THROW(s.validate(), ConfigError);
  s = hashing_spec();
  s.model_id = "";
  EXPECT_THROW(s.validate(), ConfigError);
  s = hashing_spec();
  s.kind = ProviderKind::http;
  EXPECT_THROW(s.validate(), ConfigError);  // no endpoint
  EXPECT_THROW(parse_provider_kind("onnx"), ConfigError);
}

TEST(EmbeddingCache, EmptyGetIsAbsent) {
  testing::TempDir dir;
  EmbeddingCache cache(dir / "cache.bin");
  EXPECT_FALSE(cache.get("m", "h").has_value());
  EXPECT_EQ(cache.size(), 0u);
}

TEST(EmbeddingCache, PutGetRoundTripsAcrossInstances) {
  testing::TempDir dir;
  Rng rng(4);
  EmbeddingVector v{"m", testing::random_unit_vector(rng, 33), true};
  {
    EmbeddingCache cache(dir / "cache.bin");
    cache.put("m", "h1", v);
    const auto got = cache.get("m", "h1");
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(got->values, v.values);
  }
  EmbeddingCache reopened(dir / "cache.bin");
  const auto got = reopened.get("m", "h1");
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->values, v.values);  // bit-exact
  EXPECT_FALSE(reopened.get("other", "h1").has_value());
}

TEST(EmbeddingCache, TruncatedTailIsDroppedAndRecomputed) {
  testing::TempDir dir;
  const auto file = dir / "cache.bin";
  const std::vector<std::string> texts = {"alpha beta", "gamma delta", "epsilon"};
  const auto spec = hashing_spec(32);
  std::vector<EmbeddingVector> expected;
  {
    EmbeddingCache cache(file);
    expected = embed_texts(spec, texts, &cache);
    EXPECT_EQ(cache.size(), 3u);
  }
  const auto full = std::filesystem::file_size(file);
  std::filesystem::resize_file(file, full - 13);  // cut into the last record

  std::vector<std::string> warnings;
  auto previous = log::set_sink([&](log::Level level, std::string_view msg) {
    if (level == log::Level::warning) warnings.emplace_back(msg);
  });
  EmbeddingCache cache(file);
  log::set_sink(previous);
  EXPECT_EQ(cache.size(), 2u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("corrupt or truncated"), std::string::npos);

  const auto again = embed_texts(spec, texts, &cache);
  for (std::size_t i = 0; i < texts.size(); ++i) EXPECT_EQ(again[i].values, expected[i].values);
  EXPECT_EQ(cache.size(), 3u);
  EXPECT_EQ(std::filesystem::file_size(file), full);
}

TEST(EmbeddingCache, CorruptBytesDetectedByChecksum) {
  testing::TempDir dir;
  const auto file = dir / "cache.bin";
  {
    EmbeddingCache cache(file);
    embed_texts(hashing_spec(16), std::vector<std::string>{"one", "two"}, &cache);
  }
  std::string bytes = read_file(file);
  bytes[bytes.size() - 20] ^= 0x5a;  // flip bits inside the second record's payload
  write_file_atomic(file, bytes);
  auto previous = log::set_sink([](log::Level, std::string_view) {});
  EmbeddingCache cache(file);
  log::set_sink(previous);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(EmbeddingStore, ConcatNormalized) {
  EmbeddingStore store;
  store.put("x", EmbeddingVector{"a", {1.0, 0.0}, true});
  store.put("x", EmbeddingVector{"b", {0.0, 1.0}, true});
  const std::vector<std::string> models = {"a", "b"};
  const auto v = concat_normalized(store, "x", models);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_NEAR(v[0], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(v[3], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_THROW(store.at("a", "missing"), Error);
  EXPECT_EQ(store.model_ids(), models);
}

}  // namespace
}  // namespace hardneg
