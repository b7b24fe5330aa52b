#include <gtest/gtest.h>

#include "hardneg/config.hpp"
#include "test_support.hpp"

namespace hardneg {
namespace {

constexpr const char* kFull = R"({
  "corpus": {"path": "data/corpus", "format": "html"},
  "providers": [
    {"model_id": "a", "kind": "hashing", "dim": 64, "seed": 3},
    {"model_id": "b", "kind": "http", "dim": 8, "endpoint_url": "http://localhost:1/e", "batch_size": 4}
  ],
  "ensemble": {"voting": "hard", "weights": {"a": 2, "b": 1}},
  "retrieval": {"k": 50},
  "clustering": {"k": 3, "max_iter": 10, "tol": 0.001, "restarts": 2},
  "hard_negatives": {"m": 3, "band": [0.25, 4.0], "rule": "min"},
  "bm25": {"k1": 0.9, "b": 0.4},
  "negative_kinds": ["hard", "bm25"],
  "train": {"batch_size": 8, "optimizer": "adam", "learning_rate": 0.01, "epochs": 5},
  "eval": {"ks": [1, 5], "threshold": 1000, "test_fraction": 0.0},
  "seed": 7,
  "output_dir": "runs/x"
})";

TEST(Config, ParsesEverySection) {
  const auto c = config_from_json(kFull);
  EXPECT_EQ(c.corpus_path, "data/corpus");
  EXPECT_EQ(c.corpus_format, InputFormat::html);
  ASSERT_EQ(c.providers.size(), 2u);
  EXPECT_EQ(c.providers[0].dim, 64u);
  EXPECT_EQ(c.providers[1].kind, ProviderKind::http);
  EXPECT_EQ(c.voting, VotingMode::hard);
  EXPECT_EQ(c.hard_negatives.voting, VotingMode::hard);
  EXPECT_EQ(c.weights.at("a"), 2.0);
  EXPECT_EQ(c.retrieval_k, 50u);
  EXPECT_EQ(c.clustering.k, 3u);
  EXPECT_EQ(c.hard_negatives.m, 3u);
  EXPECT_EQ(c.hard_negatives.band_high, 4.0);
  EXPECT_EQ(c.hard_negatives.rule, HardnessRule::min);
  EXPECT_EQ(c.bm25.k1, 0.9);
  EXPECT_EQ(c.negative_kinds, (std::vector<NegativeKind>{NegativeKind::hard, NegativeKind::bm25}));
  EXPECT_EQ(c.train.batch_size, 8u);
  EXPECT_EQ(c.train.dropout, 0.2);  // default kept
  EXPECT_EQ(c.eval_ks, (std::vector<std::size_t>{1, 5}));
  EXPECT_EQ(c.threshold_words, 1000u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.output_dir, "runs/x");
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, DefaultsMatchDocumentedValues) {
  const auto c = config_from_json(R"({"providers": [{"model_id": "m"}]})");
  EXPECT_EQ(c.retrieval_k, 100u);
  EXPECT_EQ(c.clustering.k, 5u);
  EXPECT_EQ(c.hard_negatives.m, 2u);
  EXPECT_EQ(c.hard_negatives.band_low, 0.5);
  EXPECT_EQ(c.hard_negatives.band_high, 2.0);
  EXPECT_EQ(c.bm25.k1, 1.2);
  EXPECT_EQ(c.bm25.b, 0.75);
  EXPECT_EQ(c.train.learning_rate, 3e-5);
  EXPECT_EQ(c.train.batch_size, 16u);
  EXPECT_EQ(c.train.epochs, 20u);
  EXPECT_EQ(c.train.margin, 1.0);
  EXPECT_EQ(c.threshold_words, 2048u);
  EXPECT_FALSE(c.seed.has_value());
  EXPECT_THROW(c.require_seed(), ConfigError);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(config_from_json(R"({"provider": []})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"train": {"lr": 1}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"providers": [{"model_id": "m", "dims": 3}]})"), ConfigError);
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(config_from_json("{not json"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"train": {"optimizer": "sgd"}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"retrieval": {"k": "many"}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"hard_negatives": {"band": [1]}})"), ConfigError);
}

TEST(Config, ValidationCatchesInconsistencies) {
  auto c = demo_config();
  EXPECT_NO_THROW(c.validate());
  c.providers.clear();
  EXPECT_THROW(c.validate(), ConfigError);

  c = demo_config();
  c.providers.push_back(c.providers.front());
  EXPECT_THROW(c.validate(), ConfigError);

  c = demo_config();
  c.weights = {{"nobody", 1.0}};
  EXPECT_THROW(c.validate(), ConfigError);

  c = demo_config();
  c.clustering.k = 1;
  EXPECT_THROW(c.validate(), ConfigError);

  c = demo_config();
  c.negative_kinds = {NegativeKind::hard, NegativeKind::hard};
  EXPECT_THROW(c.validate(), ConfigError);

  c = demo_config();
  c.test_fraction = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  const auto c = config_from_json(kFull);
  const auto text = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(text)), text);
  const auto no_paths = config_to_json(c, false);
  EXPECT_EQ(no_paths.find("runs/x"), std::string::npos);
  EXPECT_EQ(no_paths.find("data/corpus"), std::string::npos);
}

TEST(Config, LoadFromFile) {
  testing::TempDir dir;
  write_file_atomic(dir / "c.json", kFull);
  EXPECT_EQ(load_config(dir / "c.json").seed, 7u);
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
}

TEST(Config, DemoConfigIsUsable) {
  const auto c = demo_config();
  EXPECT_EQ(c.providers.size(), 2u);
  EXPECT_TRUE(c.seed.has_value());
  EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));
}

}  // namespace
}  // namespace hardneg
