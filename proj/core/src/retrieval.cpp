#include "hardneg/retrieval.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>
#include <unordered_set>

#include "hardneg/util.hpp"

namespace hardneg {

std::vector<ScoredDoc> top_k(std::span<const double> scores, std::span<const std::string> ids,
                             std::size_t k) {
  if (scores.size() != ids.size()) throw Error("top_k: score and id counts differ");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    better);
  std::vector<ScoredDoc> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({ids[order[i]], scores[order[i]]});
  return out;
}

std::vector<ScoredDoc> top_k_retrieve(const SimilarityMatrix& matrix, const std::string& query_id,
                                      std::size_t k) {
  const std::size_t row = matrix.row_index(query_id);
  return top_k(matrix.row(row), matrix.col_ids, k);
}

std::optional<std::size_t> CandidatePool::rank(const std::string& model_id,
                                               const std::string& doc_id) const {
  auto m = per_model_rank.find(model_id);
  if (m == per_model_rank.end()) return std::nullopt;
  auto it = m->second.find(doc_id);
  if (it == m->second.end()) return std::nullopt;
  return it->second;
}

CandidatePool pool_candidates(const std::string& query_id,
                              const std::map<std::string, std::vector<std::string>>& per_model_lists,
                              const std::optional<std::string>& positive_doc_id) {
  CandidatePool pool;
  pool.query_id = query_id;
  pool.positive_doc_id = positive_doc_id;
  std::unordered_set<std::string> seen;
  for (const auto& [model, list] : per_model_lists) {  // std::map: sorted model ids
    auto& ranks = pool.per_model_rank[model];
    for (std::size_t i = 0; i < list.size(); ++i) {
      ranks.emplace(list[i], i + 1);
      if (seen.insert(list[i]).second) pool.doc_ids.push_back(list[i]);
    }
  }
  pool.positive_in_pool = positive_doc_id && seen.contains(*positive_doc_id);
  return pool;
}

std::string pool_to_jsonl(const CandidatePool& pool) {
  nlohmann::ordered_json j;
  j["query_id"] = pool.query_id;
  j["doc_ids"] = pool.doc_ids;
  nlohmann::ordered_json ranks = nlohmann::ordered_json::object();
  for (const auto& [model, by_doc] : pool.per_model_rank) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (const auto& doc : pool.doc_ids) {
      if (auto it = by_doc.find(doc); it != by_doc.end()) r[doc] = it->second;
    }
    ranks[model] = std::move(r);
  }
  j["per_model_rank"] = std::move(ranks);
  if (pool.positive_doc_id) {
    j["positive_doc_id"] = *pool.positive_doc_id;
  } else {
    j["positive_doc_id"] = nullptr;
  }
  j["positive_in_pool"] = pool.positive_in_pool;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

CandidatePool pool_from_json(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  CandidatePool pool;
  pool.query_id = j.at("query_id").get<std::string>();
  pool.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  for (const auto& [model, by_doc] : j.at("per_model_rank").items()) {
    auto& ranks = pool.per_model_rank[model];
    for (const auto& [doc, rank] : by_doc.items()) ranks[doc] = rank.get<std::size_t>();
  }
  if (j.contains("positive_doc_id") && j["positive_doc_id"].is_string()) {
    pool.positive_doc_id = j["positive_doc_id"].get<std::string>();
  }
  pool.positive_in_pool = j.value("positive_in_pool", false);
  return pool;
}

}  // namespace hardneg
