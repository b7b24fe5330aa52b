#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hardneg/corpus.hpp"

namespace hardneg {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  void validate() const;
};

/// Okapi BM25 over a fixed document collection:
///   sum_t idf(t) * f (k1 + 1) / (f + k1 (1 - b + b |d| / avgdl)),
///   idf(t) = ln(1 + (N - n_t + 0.5) / (n_t + 0.5)).
class Bm25Index {
 public:
  // (doc id, term sequence) pairs.
  Bm25Index(std::vector<std::pair<std::string, std::vector<std::string>>> docs,
            Bm25Params params = {});
  explicit Bm25Index(const Corpus& corpus, Bm25Params params = {});

  double idf(const std::string& term) const;
  double score(std::span<const std::string> query_terms, std::size_t doc_index) const;
  std::vector<double> score_all(std::span<const std::string> query_terms) const;

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& doc_ids() const noexcept { return ids_; }
  double average_length() const noexcept { return avgdl_; }
  const Bm25Params& params() const noexcept { return params_; }

 private:
  Bm25Params params_;
  std::vector<std::string> ids_;
  std::vector<std::unordered_map<std::string, std::size_t>> term_freqs_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, std::size_t> doc_freq_;
  double avgdl_ = 0.0;
};

}  // namespace hardneg
