#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hardneg/corpus.hpp"
#include "hardneg/rank.hpp"

namespace hardneg {

// query id -> relevant document ids
using Relevance = std::map<std::string, std::set<std::string>>;

Relevance relevance_from_qrels(std::span<const QrelPair> qrels);

// 1-based position of the first relevant document, if any.
std::optional<std::size_t> first_relevant_rank(const RankedList& list,
                                               const std::set<std::string>& relevant);

// Mean of 1/rank over queries, counting 0 when the first relevant document is
// below k. Throws on k < 1 or when a list's query has no relevance entry.
double mrr_at_k(std::span<const RankedList> lists, const Relevance& relevance, std::size_t k);
// Without a cutoff.
double mrr(std::span<const RankedList> lists, const Relevance& relevance);

// Mean over queries of (relevant documents in the top k) / k.
double precision_at_k(std::span<const RankedList> lists, const Relevance& relevance, std::size_t k);

// Mean over queries of the mean top-min(k, n) score. Empty lists are skipped
// with a warning.
double sim_score_average_at_k(std::span<const RankedList> lists, std::size_t k);

enum class Bucket { all, short_docs, long_docs };
std::string_view to_string(Bucket bucket);
Bucket parse_bucket(std::string_view name);

struct EvalReport {
  Bucket bucket = Bucket::all;
  std::size_t threshold_words = 2048;
  std::size_t num_queries = 0;
  std::map<std::size_t, double> mrr_at;
  std::map<std::size_t, double> precision_at;
  std::map<std::size_t, double> sim_avg_at;

  bool empty() const noexcept { return num_queries == 0; }
};

// Reports for all, short (positive word_count <= threshold) and long queries,
// in that order. `positive_words` maps each query to its positive document's
// length.
std::vector<EvalReport> bucketed_report(std::span<const RankedList> lists,
                                        const Relevance& relevance,
                                        const std::map<std::string, std::size_t>& positive_words,
                                        std::span<const std::size_t> ks = std::vector<std::size_t>{3, 10},
                                        std::size_t threshold = 2048);
std::vector<EvalReport> bucketed_report(std::span<const RankedList> lists, const Corpus& corpus,
                                        std::span<const std::size_t> ks = std::vector<std::size_t>{3, 10},
                                        std::size_t threshold = 2048);

struct ComparisonRow {
  Bucket bucket = Bucket::all;
  std::string metric;  // mrr | precision | sim_avg
  std::size_t k = 0;
  double run_a = 0.0;
  double run_b = 0.0;
  double delta = 0.0;  // run_b - run_a
};

// Throws when the reports do not cover the same buckets, metrics and ks.
std::vector<ComparisonRow> compare_runs(std::span<const EvalReport> a, std::span<const EvalReport> b);

// bucket,metric,k,value; num_queries rows leave k empty.
void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
std::vector<EvalReport> read_report_csv(const std::filesystem::path& path);
// bucket,metric,k,run_a,run_b,delta
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);

// {"query_id", "entries": [{"doc_id", "score"}]}
void write_ranked_jsonl(std::ostream& out, std::span<const RankedList> lists);
std::vector<RankedList> read_ranked_jsonl(const std::filesystem::path& path);

}  // namespace hardneg
