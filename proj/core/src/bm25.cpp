#include "hardneg/bm25.hpp"

#include <cmath>

#include "hardneg/util.hpp"

namespace hardneg {

void Bm25Params::validate() const {
  if (!(k1 > 0.0)) throw ConfigError("bm25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("bm25 b must lie in [0, 1]");
}

Bm25Index::Bm25Index(std::vector<std::pair<std::string, std::vector<std::string>>> docs,
                     Bm25Params params)
    : params_(params) {
  params_.validate();
  ids_.reserve(docs.size());
  term_freqs_.reserve(docs.size());
  lengths_.reserve(docs.size());
  double total = 0.0;
  for (auto& [id, doc_terms] : docs) {
    std::unordered_map<std::string, std::size_t> tf;
    for (auto& t : doc_terms) ++tf[t];
    for (const auto& [t, _] : tf) ++doc_freq_[t];
    ids_.push_back(std::move(id));
    lengths_.push_back(doc_terms.size());
    total += static_cast<double>(doc_terms.size());
    term_freqs_.push_back(std::move(tf));
  }
  avgdl_ = ids_.empty() ? 0.0 : total / static_cast<double>(ids_.size());
}

namespace {

std::vector<std::pair<std::string, std::vector<std::string>>> corpus_terms(const Corpus& corpus) {
  std::vector<std::pair<std::string, std::vector<std::string>>> docs;
  docs.reserve(corpus.documents().size());
  for (const auto& d : corpus.documents()) docs.emplace_back(d.id, terms(d.text));
  return docs;
}

}  // namespace

Bm25Index::Bm25Index(const Corpus& corpus, Bm25Params params)
    : Bm25Index(corpus_terms(corpus), params) {}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(ids_.size());
  auto it = doc_freq_.find(term);
  const double nt = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log(1.0 + (n - nt + 0.5) / (nt + 0.5));
}

double Bm25Index::score(std::span<const std::string> query_terms, std::size_t doc_index) const {
  const auto& tf = term_freqs_.at(doc_index);
  const double len_norm =
      avgdl_ > 0.0 ? static_cast<double>(lengths_[doc_index]) / avgdl_ : 0.0;
  double total = 0.0;
  for (const auto& term : query_terms) {
    auto it = tf.find(term);
    if (it == tf.end()) continue;
    const double f = static_cast<double>(it->second);
    total += idf(term) * f * (params_.k1 + 1.0) /
             (f + params_.k1 * (1.0 - params_.b + params_.b * len_norm));
  }
  return total;
}

std::vector<double> Bm25Index::score_all(std::span<const std::string> query_terms) const {
  std::vector<double> scores(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) scores[i] = score(query_terms, i);
  return scores;
}

}  // namespace hardneg
