#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hardneg/bm25.hpp"
#include "hardneg/corpus.hpp"
#include "hardneg/embed.hpp"
#include "hardneg/ensemble.hpp"
#include "hardneg/kmeans.hpp"
#include "hardneg/negatives.hpp"
#include "hardneg/rank.hpp"
#include "hardneg/synthetic.hpp"

namespace hardneg {

struct PipelineConfig {
  std::filesystem::path corpus_path;
  InputFormat corpus_format = InputFormat::jsonl;

  std::vector<ProviderSpec> providers;
  VotingMode voting = VotingMode::soft;
  Weights weights;  // empty: equal

  std::size_t retrieval_k = 100;
  ClusteringConfig clustering;  // seed is derived per query from `seed`
  HardNegativeConfig hard_negatives;
  Bm25Params bm25;
  std::vector<NegativeKind> negative_kinds{NegativeKind::hard, NegativeKind::random};

  TrainConfig train;  // seed is derived from `seed`

  std::vector<std::size_t> eval_ks{3, 10};
  std::size_t threshold_words = 2048;
  // Share of queries held out from training and used for evaluation, chosen
  // by a seeded hash of the query id. 0 trains and evaluates on every query.
  double test_fraction = 0.2;

  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir;

  SyntheticConfig synthetic;  // demo only

  // Throws ConfigError. Does not touch the filesystem.
  void validate() const;
  std::uint64_t require_seed() const;
};

// Keys absent from the JSON keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(std::string_view json);
PipelineConfig load_config(const std::filesystem::path& path);

// Canonical JSON of every setting. With `include_paths` false the corpus path
// and output directory are left out, so relocated runs hash identically.
std::string config_to_json(const PipelineConfig& config, bool include_paths = true);

// Two hashing providers, the bilinear-scale learning rate and the synthetic
// benchmark sizes used by `demo`.
PipelineConfig demo_config();

}  // namespace hardneg
