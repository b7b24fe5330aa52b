#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hardneg/embed.hpp"

namespace hardneg {

// model_id -> non-negative weight. Empty means equal weighting.
using Weights = std::map<std::string, double>;

enum class VotingMode { soft, hard };
VotingMode parse_voting_mode(std::string_view name);

// Dot product of unit vectors, clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Dense anchor x document cosine matrix for one model, row-major.
struct SimilarityMatrix {
  std::string model_id;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<double> entries;

  std::size_t rows() const noexcept { return row_ids.size(); }
  std::size_t cols() const noexcept { return col_ids.size(); }
  double at(std::size_t row, std::size_t col) const { return entries[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(entries).subspan(r * cols(), cols());
  }
  // Row index of an anchor id; throws if absent.
  std::size_t row_index(const std::string& anchor_id) const;
};

// Throws if any vector is not unit-norm or dimensions disagree.
SimilarityMatrix similarity_matrix(const std::string& model_id,
                                   std::span<const std::string> anchor_ids,
                                   std::span<const EmbeddingVector> anchors,
                                   std::span<const std::string> doc_ids,
                                   std::span<const EmbeddingVector> docs);

SimilarityMatrix similarity_matrix(const std::string& model_id, const EmbeddingStore& anchor_store,
                                   std::span<const std::string> anchor_ids,
                                   const EmbeddingStore& doc_store,
                                   std::span<const std::string> doc_ids);

// Weighted mean sum(w_i * s_i) / sum(w_i). Throws on empty input, a negative
// weight, all-zero weights, or a model without a weight.
double soft_vote(const std::map<std::string, double>& per_model, const Weights& weights = {});

// Borda aggregation: position p of n earns n-1-p points. Ties break by the
// soft-vote score (descending) then id. Rankings must permute the same ids.
std::vector<std::string> hard_vote(const std::vector<std::vector<std::string>>& rankings,
                                   const std::map<std::string, double>& soft_scores = {});

struct EnsembleScore {
  std::string anchor_id;
  std::string doc_id;
  std::map<std::string, double> per_model;
  double combined = 0.0;
  Weights weights;  // normalized to sum to 1
};

// One row per candidate: per-model cosine against the anchor and the
// soft-vote combination.
std::vector<EnsembleScore> ensemble_table(const std::string& anchor_id,
                                          const EmbeddingStore& anchor_store,
                                          std::span<const std::string> candidates,
                                          const EmbeddingStore& doc_store,
                                          std::span<const std::string> model_ids,
                                          const Weights& weights = {});

// anchor_id,doc_id,<model ids ascending>,combined
void write_score_csv_header(std::ostream& out, std::span<const std::string> model_ids);
void write_score_csv_rows(std::ostream& out, std::span<const EnsembleScore> rows,
                          std::span<const std::string> model_ids);

}  // namespace hardneg
