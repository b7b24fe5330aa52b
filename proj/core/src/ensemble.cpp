#include "hardneg/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hardneg/util.hpp"

namespace hardneg {

namespace {

constexpr double kUnitTolerance = 1e-6;

void require_unit(const EmbeddingVector& v, const std::string& id) {
  double sum = 0.0;
  for (double x : v.values) sum += x * x;
  if (!v.normalized || std::abs(std::sqrt(sum) - 1.0) > kUnitTolerance) {
    throw Error("vector '" + id + "' is not L2-normalized");
  }
}

}  // namespace

VotingMode parse_voting_mode(std::string_view name) {
  if (name == "soft") return VotingMode::soft;
  if (name == "hard") return VotingMode::hard;
  throw ConfigError("unknown voting mode '" + std::string(name) + "' (expected soft|hard)");
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  // Rounding can leave a unit vector's self dot product an ulp short of 1.
  if (std::equal(a.begin(), a.end(), b.begin())) return 1.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine(std::span<const double>(a.values), std::span<const double>(b.values));
}

std::size_t SimilarityMatrix::row_index(const std::string& anchor_id) const {
  auto it = std::find(row_ids.begin(), row_ids.end(), anchor_id);
  if (it == row_ids.end()) {
    throw Error("no similarity row for '" + anchor_id + "' under model '" + model_id + "'");
  }
  return static_cast<std::size_t>(it - row_ids.begin());
}

SimilarityMatrix similarity_matrix(const std::string& model_id,
                                   std::span<const std::string> anchor_ids,
                                   std::span<const EmbeddingVector> anchors,
                                   std::span<const std::string> doc_ids,
                                   std::span<const EmbeddingVector> docs) {
  if (anchor_ids.size() != anchors.size() || doc_ids.size() != docs.size()) {
    throw Error("similarity_matrix: id and vector counts differ");
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) require_unit(anchors[i], anchor_ids[i]);
  for (std::size_t j = 0; j < docs.size(); ++j) require_unit(docs[j], doc_ids[j]);

  SimilarityMatrix m;
  m.model_id = model_id;
  m.row_ids.assign(anchor_ids.begin(), anchor_ids.end());
  m.col_ids.assign(doc_ids.begin(), doc_ids.end());
  m.entries.resize(anchors.size() * docs.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = 0; j < docs.size(); ++j) {
      m.entries[i * docs.size() + j] = cosine(anchors[i], docs[j]);
    }
  }
  return m;
}

SimilarityMatrix similarity_matrix(const std::string& model_id, const EmbeddingStore& anchor_store,
                                   std::span<const std::string> anchor_ids,
                                   const EmbeddingStore& doc_store,
                                   std::span<const std::string> doc_ids) {
  std::vector<EmbeddingVector> anchors;
  anchors.reserve(anchor_ids.size());
  for (const auto& id : anchor_ids) anchors.push_back(anchor_store.at(model_id, id));
  std::vector<EmbeddingVector> docs;
  docs.reserve(doc_ids.size());
  for (const auto& id : doc_ids) docs.push_back(doc_store.at(model_id, id));
  return similarity_matrix(model_id, anchor_ids, anchors, doc_ids, docs);
}

double soft_vote(const std::map<std::string, double>& per_model, const Weights& weights) {
  if (per_model.empty()) throw Error("soft_vote: no model scores");
  if (weights.empty()) {
    double sum = 0.0;
    for (const auto& [_, s] : per_model) sum += s;
    return sum / static_cast<double>(per_model.size());
  }
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& [model, s] : per_model) {
    auto it = weights.find(model);
    if (it == weights.end()) throw Error("soft_vote: no weight for model '" + model + "'");
    if (it->second < 0.0 || !std::isfinite(it->second)) {
      throw Error("soft_vote: weight for model '" + model + "' must be non-negative");
    }
    weighted += it->second * s;
    total += it->second;
  }
  if (total == 0.0) throw Error("soft_vote: weights are all zero");
  return weighted / total;
}

std::vector<std::string> hard_vote(const std::vector<std::vector<std::string>>& rankings,
                                   const std::map<std::string, double>& soft_scores) {
  if (rankings.empty()) return {};
  const std::set<std::string> reference(rankings.front().begin(), rankings.front().end());
  if (reference.size() != rankings.front().size()) {
    throw Error("hard_vote: ranking contains duplicate ids");
  }
  std::map<std::string, std::size_t> points;
  for (const auto& ranking : rankings) {
    const std::set<std::string> ids(ranking.begin(), ranking.end());
    if (ids != reference || ranking.size() != reference.size()) {
      throw Error("hard_vote: rankings are not permutations of the same id set");
    }
    const std::size_t n = ranking.size();
    for (std::size_t p = 0; p < n; ++p) points[ranking[p]] += n - 1 - p;
  }
  std::vector<std::string> order(reference.begin(), reference.end());
  auto soft = [&](const std::string& id) {
    auto it = soft_scores.find(id);
    return it == soft_scores.end() ? 0.0 : it->second;
  };
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    if (points[a] != points[b]) return points[a] > points[b];
    const double sa = soft(a), sb = soft(b);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return order;
}

std::vector<EnsembleScore> ensemble_table(const std::string& anchor_id,
                                          const EmbeddingStore& anchor_store,
                                          std::span<const std::string> candidates,
                                          const EmbeddingStore& doc_store,
                                          std::span<const std::string> model_ids,
                                          const Weights& weights) {
  if (model_ids.empty()) throw Error("ensemble_table: no providers");
  Weights normalized;
  if (weights.empty()) {
    for (const auto& m : model_ids) normalized[m] = 1.0 / static_cast<double>(model_ids.size());
  } else {
    double total = 0.0;
    for (const auto& m : model_ids) {
      auto it = weights.find(m);
      if (it == weights.end()) throw Error("ensemble_table: no weight for model '" + m + "'");
      if (it->second < 0.0) throw Error("ensemble_table: negative weight for model '" + m + "'");
      total += it->second;
    }
    if (total == 0.0) throw Error("ensemble_table: weights are all zero");
    for (const auto& m : model_ids) normalized[m] = weights.at(m) / total;
  }

  std::vector<EnsembleScore> rows;
  rows.reserve(candidates.size());
  for (const auto& doc : candidates) {
    EnsembleScore row;
    row.anchor_id = anchor_id;
    row.doc_id = doc;
    for (const auto& m : model_ids) {
      const auto* a = anchor_store.find(m, anchor_id);
      if (!a) throw Error("missing embedding for anchor '" + anchor_id + "' under provider '" + m + "'");
      const auto* d = doc_store.find(m, doc);
      if (!d) throw Error("missing embedding for candidate '" + doc + "' under provider '" + m + "'");
      row.per_model[m] = cosine(*a, *d);
    }
    row.combined = soft_vote(row.per_model, weights);
    row.weights = normalized;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_score_csv_header(std::ostream& out, std::span<const std::string> model_ids) {
  std::vector<std::string> sorted(model_ids.begin(), model_ids.end());
  std::sort(sorted.begin(), sorted.end());
  out << "anchor_id,doc_id";
  for (const auto& m : sorted) out << ',' << csv_escape(m);
  out << ",combined\n";
}

void write_score_csv_rows(std::ostream& out, std::span<const EnsembleScore> rows,
                          std::span<const std::string> model_ids) {
  std::vector<std::string> sorted(model_ids.begin(), model_ids.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& row : rows) {
    out << csv_escape(row.anchor_id) << ',' << csv_escape(row.doc_id);
    for (const auto& m : sorted) out << ',' << format_double(row.per_model.at(m));
    out << ',' << format_double(row.combined) << '\n';
  }
}

}  // namespace hardneg
