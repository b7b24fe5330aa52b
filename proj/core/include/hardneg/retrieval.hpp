#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hardneg/ensemble.hpp"

namespace hardneg {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

// The k best (score descending, ties by ascending id); fewer when n < k.
std::vector<ScoredDoc> top_k(std::span<const double> scores, std::span<const std::string> ids,
                             std::size_t k);

// Top-k documents for one query row of a model's similarity matrix.
std::vector<ScoredDoc> top_k_retrieve(const SimilarityMatrix& matrix, const std::string& query_id,
                                      std::size_t k = 100);

/// Union of per-model top-k lists for one query.
struct CandidatePool {
  std::string query_id;
  std::vector<std::string> doc_ids;  // unique, first-seen order over sorted model ids
  std::map<std::string, std::map<std::string, std::size_t>> per_model_rank;  // model -> doc -> 1-based rank
  std::optional<std::string> positive_doc_id;
  bool positive_in_pool = false;

  std::optional<std::size_t> rank(const std::string& model_id, const std::string& doc_id) const;
};

CandidatePool pool_candidates(const std::string& query_id,
                              const std::map<std::string, std::vector<std::string>>& per_model_lists,
                              const std::optional<std::string>& positive_doc_id = std::nullopt);

std::string pool_to_jsonl(const CandidatePool& pool);
CandidatePool pool_from_json(std::string_view line);

}  // namespace hardneg
