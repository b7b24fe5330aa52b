#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hardneg/config.hpp"
#include "hardneg/eval.hpp"

namespace hardneg {

enum class Stage { ingest, embed, score, mine, train, rerank, eval };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);
std::span<const Stage> all_stages();

// Files inside a run directory.
namespace artifact {
inline constexpr const char* corpus_dir = "corpus";
inline constexpr const char* cache = "cache/embeddings.bin";
inline constexpr const char* embeddings = "embeddings.jsonl";
inline constexpr const char* scores = "scores.csv";
inline constexpr const char* pools = "pools.jsonl";
inline constexpr const char* scatter = "scatter.csv";
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* lock = ".lock";
std::string triplets(std::string_view kind);  // triplets_<kind>.jsonl
std::string model(std::string_view kind);     // model_<kind>.json
std::string loss(std::string_view kind);      // loss_<kind>.csv
std::string ranked(std::string_view ranker);  // ranked_<ranker>.jsonl
std::string report(std::string_view ranker);  // report_<ranker>.csv
std::string comparison(std::string_view a, std::string_view b);  // compare_<a>_vs_<b>.csv
}  // namespace artifact

// Name of the untrained (identity) ranker evaluated alongside trained ones.
inline constexpr const char* kBaselineRanker = "baseline";

struct QuerySplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Seeded hash split of sorted query ids. With fraction 0, or when one side
// would be empty, both sides hold every query.
QuerySplit split_queries(std::vector<std::string> query_ids, std::uint64_t seed, double fraction);

struct StageOutcome {
  Stage stage;
  bool skipped = false;
};

struct RunSummary {
  std::filesystem::path run_dir;
  std::vector<StageOutcome> stages;
  std::map<std::string, std::vector<EvalReport>> reports;  // ranker -> buckets
  // "<a>_vs_<b>" -> rows with delta = b - a
  std::map<std::string, std::vector<ComparisonRow>> comparisons;
};

// Runs `stages` (in pipeline order) inside config.output_dir. A stage is
// skipped when the manifest records the same fingerprint (stage settings plus
// input hashes) and its outputs still hash as recorded. Failures surface as
// StageError naming the stage; outputs written so far stay in place. The run
// directory is locked for the duration.
RunSummary run_pipeline(const PipelineConfig& config, std::span<const Stage> stages = all_stages());

// Writes the synthetic benchmark (seeded by the global seed) to
// <output_dir>/input and runs every stage on it.
RunSummary run_demo(PipelineConfig config);

}  // namespace hardneg
