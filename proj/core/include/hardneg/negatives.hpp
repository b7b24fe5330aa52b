#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hardneg/bm25.hpp"
#include "hardneg/corpus.hpp"
#include "hardneg/ensemble.hpp"

namespace hardneg {

enum class NegativeKind { hard, random, bm25 };
NegativeKind parse_negative_kind(std::string_view name);
std::string_view to_string(NegativeKind kind);

// How similarity to the query and to the positive combine into hardness.
enum class HardnessRule { mean, min };
HardnessRule parse_hardness_rule(std::string_view name);
double hardness(double sim_query, double sim_positive, HardnessRule rule = HardnessRule::mean);

struct HardNegativeConfig {
  std::size_t m = 2;
  double band_low = 0.5;   // candidate/positive word-count ratio bounds, inclusive
  double band_high = 2.0;
  HardnessRule rule = HardnessRule::mean;
  VotingMode voting = VotingMode::soft;

  void validate() const;
};

struct HardNegativeCandidate {
  std::string doc_id;
  double sim_query = 0.0;     // combined (soft-vote) similarity to the query
  double sim_positive = 0.0;  // combined similarity to the positive
  std::size_t cluster = 0;
  std::size_t word_count = 0;
  // Per-model similarities; only consulted in hard-voting mode.
  std::map<std::string, double> model_sim_query;
  std::map<std::string, double> model_sim_positive;
};

enum class SelectionStage {
  cluster_and_band,  // positive's cluster, inside the length band
  pool_and_band,     // whole pool, inside the length band
  pool,              // whole pool, unfiltered
  none,              // nothing but the positive
};
std::string_view to_string(SelectionStage stage);

struct HardNegativeSelection {
  std::vector<std::string> doc_ids;
  SelectionStage stage = SelectionStage::none;
};

// Top-m candidates by hardness among the first eligibility stage offering at
// least m of them (falling back to the whole pool). Never returns the positive.
HardNegativeSelection select_hard_negatives(std::span<const HardNegativeCandidate> candidates,
                                            const std::string& positive_doc_id,
                                            std::size_t positive_cluster,
                                            std::size_t positive_word_count,
                                            const HardNegativeConfig& config);

// m distinct seeded draws without replacement, excluding the positive.
// `doc_ids` order does not matter; it is sorted first.
std::vector<std::string> sample_random_negatives(std::span<const std::string> doc_ids,
                                                 const std::string& positive_doc_id,
                                                 std::size_t m, std::uint64_t seed);

// Top-m non-positive documents by BM25 (descending, ties by id).
std::vector<std::string> bm25_negatives(const Bm25Index& index,
                                        std::span<const std::string> query_terms,
                                        const std::string& positive_doc_id, std::size_t m);

struct Triplet {
  std::string query_id;
  std::string positive_doc_id;
  std::string negative_doc_id;
  NegativeKind negative_kind = NegativeKind::hard;

  bool operator==(const Triplet&) const = default;
};

// query id -> kind -> negatives in rank order
using NegativeSets = std::map<std::string, std::map<NegativeKind, std::vector<std::string>>>;

// One triplet per (query, negative), ordered by query id, kind, then rank.
std::vector<Triplet> build_triplets(std::span<const QrelPair> qrels, const NegativeSets& negatives);

/// A triplet with its texts, as exchanged with external trainers.
struct TripletRecord {
  Triplet triplet;
  std::string query;
  std::string pos;
  std::string neg;
};

void write_triplets_jsonl(std::ostream& out, std::span<const Triplet> triplets,
                          const Corpus& corpus);
std::vector<TripletRecord> read_triplets_jsonl(const std::filesystem::path& path);

}  // namespace hardneg
