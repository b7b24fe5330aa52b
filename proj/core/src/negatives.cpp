#include "hardneg/negatives.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>

#include "hardneg/retrieval.hpp"
#include "hardneg/util.hpp"

namespace hardneg {

NegativeKind parse_negative_kind(std::string_view name) {
  if (name == "hard") return NegativeKind::hard;
  if (name == "random") return NegativeKind::random;
  if (name == "bm25") return NegativeKind::bm25;
  throw ConfigError("unknown negative kind '" + std::string(name) + "' (expected hard|random|bm25)");
}

std::string_view to_string(NegativeKind kind) {
  switch (kind) {
    case NegativeKind::hard: return "hard";
    case NegativeKind::random: return "random";
    case NegativeKind::bm25: return "bm25";
  }
  return "unknown";
}

HardnessRule parse_hardness_rule(std::string_view name) {
  if (name == "mean") return HardnessRule::mean;
  if (name == "min") return HardnessRule::min;
  throw ConfigError("unknown hardness rule '" + std::string(name) + "' (expected mean|min)");
}

double hardness(double sim_query, double sim_positive, HardnessRule rule) {
  return rule == HardnessRule::min ? std::min(sim_query, sim_positive)
                                   : (sim_query + sim_positive) / 2.0;
}

void HardNegativeConfig::validate() const {
  if (m == 0) throw ConfigError("hard-negative count m must be >= 1");
  if (!(band_low >= 0.0) || !(band_high >= band_low)) {
    throw ConfigError("length band must satisfy 0 <= low <= high");
  }
}

std::string_view to_string(SelectionStage stage) {
  switch (stage) {
    case SelectionStage::cluster_and_band: return "cluster_and_band";
    case SelectionStage::pool_and_band: return "pool_and_band";
    case SelectionStage::pool: return "pool";
    case SelectionStage::none: return "none";
  }
  return "unknown";
}

HardNegativeSelection select_hard_negatives(std::span<const HardNegativeCandidate> candidates,
                                            const std::string& positive_doc_id,
                                            std::size_t positive_cluster,
                                            std::size_t positive_word_count,
                                            const HardNegativeConfig& config) {
  config.validate();
  std::vector<const HardNegativeCandidate*> pool;
  for (const auto& c : candidates) {
    if (c.doc_id != positive_doc_id) pool.push_back(&c);
  }
  if (pool.empty()) {
    log::warn("hard-negative pool for positive '" + positive_doc_id +
              "' holds no other document; no hard negatives selected");
    return {};
  }

  // Ranking order over the whole pool: by hardness (soft) or by Borda over
  // per-model hardness rankings (hard).
  std::vector<const HardNegativeCandidate*> ranked = pool;
  auto soft_order = [&](const HardNegativeCandidate* a, const HardNegativeCandidate* b) {
    const double ha = hardness(a->sim_query, a->sim_positive, config.rule);
    const double hb = hardness(b->sim_query, b->sim_positive, config.rule);
    if (ha != hb) return ha > hb;
    return a->doc_id < b->doc_id;
  };
  if (config.voting == VotingMode::soft) {
    std::sort(ranked.begin(), ranked.end(), soft_order);
  } else {
    std::map<std::string, double> soft_scores;
    std::map<std::string, const HardNegativeCandidate*> by_id;
    std::vector<std::string> models;
    for (const auto* c : pool) {
      soft_scores[c->doc_id] = hardness(c->sim_query, c->sim_positive, config.rule);
      by_id[c->doc_id] = c;
    }
    for (const auto& [m, _] : pool.front()->model_sim_query) models.push_back(m);
    if (models.empty()) throw Error("hard voting needs per-model similarities");
    std::vector<std::vector<std::string>> rankings;
    for (const auto& m : models) {
      std::vector<const HardNegativeCandidate*> order = pool;
      std::sort(order.begin(), order.end(), [&](const auto* a, const auto* b) {
        const double ha = hardness(a->model_sim_query.at(m), a->model_sim_positive.at(m), config.rule);
        const double hb = hardness(b->model_sim_query.at(m), b->model_sim_positive.at(m), config.rule);
        if (ha != hb) return ha > hb;
        return a->doc_id < b->doc_id;
      });
      std::vector<std::string> ids;
      for (const auto* c : order) ids.push_back(c->doc_id);
      rankings.push_back(std::move(ids));
    }
    ranked.clear();
    for (const auto& id : hard_vote(rankings, soft_scores)) ranked.push_back(by_id.at(id));
  }

  auto in_band = [&](const HardNegativeCandidate* c) {
    if (positive_word_count == 0) return true;
    const double ratio =
        static_cast<double>(c->word_count) / static_cast<double>(positive_word_count);
    return ratio >= config.band_low && ratio <= config.band_high;
  };
  auto in_cluster = [&](const HardNegativeCandidate* c) { return c->cluster == positive_cluster; };

  struct Stage {
    SelectionStage name;
    std::function<bool(const HardNegativeCandidate*)> eligible;
  };
  const Stage stages[] = {
      {SelectionStage::cluster_and_band, [&](auto* c) { return in_cluster(c) && in_band(c); }},
      {SelectionStage::pool_and_band, [&](auto* c) { return in_band(c); }},
      {SelectionStage::pool, [](auto*) { return true; }},
  };
  for (const auto& stage : stages) {
    std::vector<std::string> picked;
    for (const auto* c : ranked) {
      if (!stage.eligible(c)) continue;
      picked.push_back(c->doc_id);
    }
    if (picked.size() >= config.m || stage.name == SelectionStage::pool) {
      if (picked.size() > config.m) picked.resize(config.m);
      return {std::move(picked), stage.name};
    }
  }
  return {};
}

std::vector<std::string> sample_random_negatives(std::span<const std::string> doc_ids,
                                                 const std::string& positive_doc_id,
                                                 std::size_t m, std::uint64_t seed) {
  std::vector<std::string> pool;
  pool.reserve(doc_ids.size());
  for (const auto& id : doc_ids) {
    if (id != positive_doc_id) pool.push_back(id);
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (pool.size() < m) {
    throw Error("cannot draw " + std::to_string(m) + " random negatives from " +
                std::to_string(pool.size()) + " non-positive documents");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  }
  pool.resize(m);
  return pool;
}

std::vector<std::string> bm25_negatives(const Bm25Index& index,
                                        std::span<const std::string> query_terms,
                                        const std::string& positive_doc_id, std::size_t m) {
  const auto scores = index.score_all(query_terms);
  std::vector<double> kept_scores;
  std::vector<std::string> kept_ids;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index.doc_ids()[i] == positive_doc_id) continue;
    kept_scores.push_back(scores[i]);
    kept_ids.push_back(index.doc_ids()[i]);
  }
  if (kept_ids.size() < m) {
    log::warn("only " + std::to_string(kept_ids.size()) + " BM25 negatives available, " +
              std::to_string(m) + " requested");
  }
  std::vector<std::string> out;
  for (auto& s : top_k(kept_scores, kept_ids, m)) out.push_back(std::move(s.doc_id));
  return out;
}

std::vector<Triplet> build_triplets(std::span<const QrelPair> qrels, const NegativeSets& negatives) {
  std::map<std::string, std::string> positive;
  for (const auto& q : qrels) positive[q.query_id] = q.positive_doc_id;
  std::vector<Triplet> out;
  for (const auto& [query_id, by_kind] : negatives) {
    auto it = positive.find(query_id);
    if (it == positive.end()) throw Error("query '" + query_id + "' has negatives but no qrel");
    std::size_t count = 0;
    for (const auto& [kind, ids] : by_kind) {
      for (const auto& neg : ids) {
        if (neg == it->second) {
          throw Error("negative for query '" + query_id + "' equals its positive '" + neg + "'");
        }
        out.push_back({query_id, it->second, neg, kind});
        ++count;
      }
    }
    if (count == 0) throw Error("query '" + query_id + "' has no negatives");
  }
  return out;
}

void write_triplets_jsonl(std::ostream& out, std::span<const Triplet> triplets,
                          const Corpus& corpus) {
  for (const auto& t : triplets) {
    nlohmann::ordered_json j;
    j["query"] = corpus.query(t.query_id).text;
    j["pos"] = corpus.document(t.positive_doc_id).text;
    j["neg"] = corpus.document(t.negative_doc_id).text;
    j["query_id"] = t.query_id;
    j["positive_doc_id"] = t.positive_doc_id;
    j["negative_doc_id"] = t.negative_doc_id;
    j["negative_kind"] = std::string(to_string(t.negative_kind));
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

std::vector<TripletRecord> read_triplets_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open triplets file " + path.string());
  std::vector<TripletRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TripletRecord r;
      r.query = j.at("query").get<std::string>();
      r.pos = j.at("pos").get<std::string>();
      r.neg = j.at("neg").get<std::string>();
      r.triplet.query_id = j.value("query_id", std::string{});
      r.triplet.positive_doc_id = j.value("positive_doc_id", std::string{});
      r.triplet.negative_doc_id = j.value("negative_doc_id", std::string{});
      r.triplet.negative_kind = parse_negative_kind(j.value("negative_kind", std::string("hard")));
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace hardneg
