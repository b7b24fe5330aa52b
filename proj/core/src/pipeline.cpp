#include "hardneg/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "hardneg/kmeans.hpp"
#include "hardneg/projection.hpp"
#include "hardneg/retrieval.hpp"
#include "hardneg/util.hpp"

namespace hardneg {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<Stage, 7> kStages = {Stage::ingest, Stage::embed, Stage::score, Stage::mine,
                                          Stage::train,  Stage::rerank, Stage::eval};
constexpr const char* kToolVersion = "0.3.0";

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::embed: return "embed";
    case Stage::score: return "score";
    case Stage::mine: return "mine";
    case Stage::train: return "train";
    case Stage::rerank: return "rerank";
    case Stage::eval: return "eval";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : kStages) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::span<const Stage> all_stages() { return kStages; }

namespace artifact {
std::string triplets(std::string_view kind) { return "triplets_" + std::string(kind) + ".jsonl"; }
std::string model(std::string_view kind) { return "model_" + std::string(kind) + ".json"; }
std::string loss(std::string_view kind) { return "loss_" + std::string(kind) + ".csv"; }
std::string ranked(std::string_view ranker) { return "ranked_" + std::string(ranker) + ".jsonl"; }
std::string report(std::string_view ranker) { return "report_" + std::string(ranker) + ".csv"; }
std::string comparison(std::string_view a, std::string_view b) {
  return "compare_" + std::string(a) + "_vs_" + std::string(b) + ".csv";
}
}  // namespace artifact

QuerySplit split_queries(std::vector<std::string> query_ids, std::uint64_t seed, double fraction) {
  std::sort(query_ids.begin(), query_ids.end());
  QuerySplit split;
  if (fraction > 0.0) {
    for (const auto& id : query_ids) {
      const double u = static_cast<double>(hash64(id, derive_seed(seed, "split")) >> 11) * 0x1.0p-53;
      (u < fraction ? split.test : split.train).push_back(id);
    }
  }
  if (split.train.empty() || split.test.empty()) {
    if (fraction > 0.0) {
      log::warn("query split left one side empty; training and evaluating on all queries");
    }
    split.train = query_ids;
    split.test = query_ids;
  }
  return split;
}

namespace {

// ---------------------------------------------------------------- run dir

class DirLock {
 public:
  explicit DirLock(const fs::path& file) {
    fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open lock file " + file.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error("run directory " + file.parent_path().string() +
                  " is in use by another hardneg process");
    }
  }
  ~DirLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

struct Embeddings {
  std::vector<std::string> model_ids;  // sorted
  EmbeddingStore docs;
  EmbeddingStore queries;
  std::vector<std::string> doc_ids;    // sorted, embedded
  std::vector<std::string> query_ids;  // sorted, embedded

  std::vector<double> doc(const std::string& id) const {
    return concat_normalized(docs, id, model_ids);
  }
  std::vector<double> query(const std::string& id) const {
    return concat_normalized(queries, id, model_ids);
  }
};

class Run {
 public:
  explicit Run(const PipelineConfig& config) : config_(config), dir_(config.output_dir) {
    fs::create_directories(dir_);
    lock_ = std::make_unique<DirLock>(dir_ / artifact::lock);
    const fs::path manifest = dir_ / artifact::manifest;
    if (fs::exists(manifest)) {
      try {
        manifest_ = json::parse(read_file(manifest));
      } catch (const json::exception&) {
        log::warn("manifest is unreadable; every stage will run");
        manifest_ = json::object();
      }
    }
    settings_ = json::parse(config_to_json(config_, false));
  }

  RunSummary execute(std::span<const Stage> requested) {
    RunSummary summary;
    summary.run_dir = dir_;
    const std::set<Stage> wanted(requested.begin(), requested.end());
    for (Stage stage : kStages) {
      if (!wanted.count(stage)) continue;
      try {
        summary.stages.push_back({stage, run_stage(stage)});
      } catch (const StageError&) {
        throw;
      } catch (const std::exception& e) {
        throw StageError(std::string(to_string(stage)), e.what());
      }
    }
    if (wanted.count(Stage::eval)) collect(summary);
    return summary;
  }

 private:
  // ---------------------------------------------------------- bookkeeping

  fs::path path(const std::string& rel) const { return dir_ / rel; }

  std::vector<std::string> corpus_files() const {
    return {std::string(artifact::corpus_dir) + "/documents.jsonl",
            std::string(artifact::corpus_dir) + "/queries.jsonl",
            std::string(artifact::corpus_dir) + "/qrels.jsonl"};
  }

  std::vector<std::string> kind_names() const {
    std::vector<std::string> out;
    for (auto k : config_.negative_kinds) out.emplace_back(to_string(k));
    return out;
  }

  std::vector<std::string> ranker_names() const {
    std::vector<std::string> out{kBaselineRanker};
    for (const auto& k : kind_names()) out.push_back(k);
    return out;
  }

  std::vector<std::pair<std::string, std::string>> comparison_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : kind_names()) out.emplace_back(kBaselineRanker, k);
    const auto kinds = kind_names();
    if (std::count(kinds.begin(), kinds.end(), "hard") && std::count(kinds.begin(), kinds.end(), "random")) {
      out.emplace_back("random", "hard");
    }
    return out;
  }

  json stage_settings(Stage stage) const {
    json s = json::object();
    auto take = [&](const char* key) { s[key] = settings_.at(key); };
    switch (stage) {
      case Stage::ingest: take("corpus"); break;
      case Stage::embed: take("providers"); break;
      case Stage::score:
        take("providers");
        take("ensemble");
        take("retrieval");
        break;
      case Stage::mine:
        take("ensemble");
        take("clustering");
        take("hard_negatives");
        take("bm25");
        take("negative_kinds");
        take("eval");
        take("seed");
        break;
      case Stage::train:
        take("train");
        take("negative_kinds");
        take("seed");
        break;
      case Stage::rerank:
        take("negative_kinds");
        take("eval");
        take("seed");
        break;
      case Stage::eval:
        take("negative_kinds");
        take("eval");
        break;
    }
    s["tool_version"] = kToolVersion;
    return s;
  }

  // Relative input path -> sha256; for ingest, the external corpus files.
  std::map<std::string, std::string> input_hashes(Stage stage) const {
    std::map<std::string, std::string> out;
    auto add = [&](const std::string& rel) {
      const fs::path p = path(rel);
      if (!fs::exists(p)) {
        throw Error("missing input " + p.string() + "; run the earlier stages first");
      }
      out[rel] = sha256_file(p);
    };
    switch (stage) {
      case Stage::ingest: {
        const fs::path& input = config_.corpus_path;
        if (input.empty()) throw ConfigError("no corpus path configured");
        if (!fs::exists(input)) throw ConfigError("corpus path " + input.string() + " does not exist");
        if (fs::is_directory(input)) {
          std::vector<fs::path> files;
          for (const auto& e : fs::recursive_directory_iterator(input)) {
            if (e.is_regular_file()) files.push_back(e.path());
          }
          std::sort(files.begin(), files.end());
          for (const auto& f : files) {
            out["input/" + fs::relative(f, input).generic_string()] = sha256_file(f);
          }
        } else {
          out["input/" + input.filename().generic_string()] = sha256_file(input);
        }
        break;
      }
      case Stage::embed:
        for (const auto& f : corpus_files()) add(f);
        break;
      case Stage::score:
        add(artifact::embeddings);
        add(corpus_files()[2]);
        break;
      case Stage::mine:
        for (const auto& f : corpus_files()) add(f);
        add(artifact::embeddings);
        add(artifact::pools);
        break;
      case Stage::train:
        add(artifact::embeddings);
        for (const auto& k : kind_names()) add(artifact::triplets(k));
        break;
      case Stage::rerank:
        for (const auto& f : corpus_files()) add(f);
        add(artifact::embeddings);
        add(artifact::pools);
        for (const auto& k : kind_names()) add(artifact::model(k));
        break;
      case Stage::eval:
        for (const auto& f : corpus_files()) add(f);
        for (const auto& r : ranker_names()) add(artifact::ranked(r));
        break;
    }
    return out;
  }

  std::string fingerprint(Stage stage) const {
    ordered_json j;
    j["stage"] = std::string(to_string(stage));
    j["settings"] = stage_settings(stage);
    j["inputs"] = input_hashes(stage);
    return sha256_hex(j.dump());
  }

  bool up_to_date(Stage stage, const std::string& fp) const {
    const auto stages = manifest_.find("stages");
    if (stages == manifest_.end()) return false;
    const auto entry = stages->find(std::string(to_string(stage)));
    if (entry == stages->end() || entry->value("fingerprint", std::string{}) != fp) return false;
    for (const auto& [rel, hash] : entry->at("outputs").items()) {
      const fs::path p = path(rel);
      if (!fs::exists(p) || sha256_file(p) != hash.get<std::string>()) return false;
    }
    return true;
  }

  void record(Stage stage, const std::string& fp, const std::vector<std::string>& outputs) {
    json entry;
    entry["fingerprint"] = fp;
    entry["outputs"] = json::object();
    for (const auto& rel : outputs) entry["outputs"][rel] = sha256_file(path(rel));
    manifest_["stages"][std::string(to_string(stage))] = entry;

    ordered_json out;
    out["format"] = "hardneg-manifest";
    out["version"] = 1;
    out["tool_version"] = kToolVersion;
    out["config_sha256"] = sha256_hex(config_to_json(config_, false));
    out["stages"] = ordered_json::object();
    for (Stage s : kStages) {
      auto it = manifest_["stages"].find(std::string(to_string(s)));
      if (it == manifest_["stages"].end()) continue;
      ordered_json e;
      e["fingerprint"] = it->at("fingerprint");
      e["outputs"] = ordered_json::object();
      for (const auto& [rel, hash] : it->at("outputs").items()) e["outputs"][rel] = hash;
      out["stages"][std::string(to_string(s))] = e;
    }
    write_file_atomic(path(artifact::manifest), out.dump(2) + "\n");
  }

  bool run_stage(Stage stage) {
    const std::string fp = fingerprint(stage);
    if (up_to_date(stage, fp)) {
      log::info(std::string("stage ") + std::string(to_string(stage)) + ": up to date, skipped");
      return true;
    }
    log::info(std::string("stage ") + std::string(to_string(stage)) + ": running");
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::string> outputs;
    switch (stage) {
      case Stage::ingest: outputs = ingest(); break;
      case Stage::embed: outputs = embed(); break;
      case Stage::score: outputs = score(); break;
      case Stage::mine: outputs = mine(); break;
      case Stage::train: outputs = train_models(); break;
      case Stage::rerank: outputs = rerank_all(); break;
      case Stage::eval: outputs = evaluate(); break;
    }
    record(stage, fp, outputs);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;
    char elapsed[32];
    std::snprintf(elapsed, sizeof elapsed, "%.2f", took.count());
    log::info(std::string("stage ") + std::string(to_string(stage)) + ": finished in " + elapsed + " s");
    return false;
  }

  // ---------------------------------------------------------- loaders

  Corpus load_corpus() const { return read_corpus(path(artifact::corpus_dir)); }

  Embeddings load_embeddings() const {
    Embeddings e;
    std::ifstream in(path(artifact::embeddings), std::ios::binary);
    if (!in) throw Error("cannot open " + path(artifact::embeddings).string());
    std::set<std::string> models, docs, queries;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      EmbeddingVector v;
      v.model_id = j.at("model").get<std::string>();
      v.values = j.at("values").get<std::vector<double>>();
      v.normalized = true;
      const auto id = j.at("id").get<std::string>();
      models.insert(v.model_id);
      if (j.at("role").get<std::string>() == "query") {
        queries.insert(id);
        e.queries.put(id, std::move(v));
      } else {
        docs.insert(id);
        e.docs.put(id, std::move(v));
      }
    }
    e.model_ids.assign(models.begin(), models.end());
    e.doc_ids.assign(docs.begin(), docs.end());
    e.query_ids.assign(queries.begin(), queries.end());
    return e;
  }

  std::map<std::string, CandidatePool> load_pools() const {
    std::map<std::string, CandidatePool> pools;
    std::istringstream in(read_file(path(artifact::pools)));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto pool = pool_from_json(line);
      pools.emplace(pool.query_id, std::move(pool));
    }
    return pools;
  }

  // Queries that can be mined: embedded, with an embedded positive.
  std::vector<std::string> usable_queries(const Corpus& corpus, const Embeddings& emb) const {
    const std::set<std::string> docs(emb.doc_ids.begin(), emb.doc_ids.end());
    std::vector<std::string> out;
    for (const auto& q : emb.query_ids) {
      const auto positive = corpus.positive_for(q);
      if (!positive) continue;
      if (!docs.count(*positive)) {
        log::warn("query '" + q + "' skipped: its positive '" + *positive + "' has no embedding");
        continue;
      }
      out.push_back(q);
    }
    return out;
  }

  void write_text(const std::string& rel, const std::string& contents) const {
    if (fs::path(rel).has_parent_path()) fs::create_directories(path(rel).parent_path());
    write_file_atomic(path(rel), contents);
  }

  // ---------------------------------------------------------- stages

  std::vector<std::string> ingest() {
    const Corpus corpus = hardneg::ingest(config_.corpus_path, config_.corpus_format);
    write_corpus(corpus, path(artifact::corpus_dir));
    const auto stats = length_stats(corpus, config_.threshold_words);
    log::info("ingested " + std::to_string(corpus.documents().size()) + " documents (" +
              std::to_string(stats.short_count) + " short, " + std::to_string(stats.long_count) +
              " long), " + std::to_string(corpus.queries().size()) + " queries");
    return corpus_files();
  }

  std::vector<std::string> embed() {
    const Corpus corpus = load_corpus();
    std::vector<std::string> doc_ids, doc_texts, query_ids, query_texts;
    for (const auto& d : corpus.documents()) {
      if (d.word_count == 0) {
        log::warn("document '" + d.id + "' has no text and is not embedded");
        continue;
      }
      doc_ids.push_back(d.id);
      doc_texts.push_back(d.text);
    }
    for (const auto& q : corpus.queries()) {
      if (q.word_count == 0) {
        log::warn("query '" + q.id + "' has no words and is not mined");
        continue;
      }
      query_ids.push_back(q.id);
      query_texts.push_back(q.text);
    }

    EmbeddingCache cache(path(artifact::cache));
    auto providers = config_.providers;
    std::sort(providers.begin(), providers.end(),
              [](const ProviderSpec& a, const ProviderSpec& b) { return a.model_id < b.model_id; });
    std::ostringstream out;
    auto emit = [&](const std::string& model, const char* role, const std::string& id,
                    const EmbeddingVector& v) {
      ordered_json j;
      j["model"] = model;
      j["role"] = role;
      j["id"] = id;
      j["values"] = v.values;
      out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    };
    for (const auto& spec : providers) {
      const auto docs = embed_texts(spec, doc_texts, &cache);
      for (std::size_t i = 0; i < docs.size(); ++i) emit(spec.model_id, "doc", doc_ids[i], docs[i]);
      const auto queries = embed_texts(spec, query_texts, &cache);
      for (std::size_t i = 0; i < queries.size(); ++i) {
        emit(spec.model_id, "query", query_ids[i], queries[i]);
      }
    }
    write_text(artifact::embeddings, out.str());
    return {artifact::embeddings};
  }

  std::vector<std::string> score() {
    const Corpus corpus = load_corpus();
    const Embeddings emb = load_embeddings();
    std::map<std::string, SimilarityMatrix> matrices;
    for (const auto& m : emb.model_ids) {
      matrices.emplace(m, similarity_matrix(m, emb.queries, emb.query_ids, emb.docs, emb.doc_ids));
    }
    std::ostringstream pools, scores;
    write_score_csv_header(scores, emb.model_ids);
    for (const auto& q : emb.query_ids) {
      std::map<std::string, std::vector<std::string>> lists;
      for (const auto& [m, matrix] : matrices) {
        for (auto& s : top_k_retrieve(matrix, q, config_.retrieval_k)) lists[m].push_back(s.doc_id);
      }
      const auto pool = pool_candidates(q, lists, corpus.positive_for(q));
      pools << pool_to_jsonl(pool);
      const auto rows =
          ensemble_table(q, emb.queries, pool.doc_ids, emb.docs, emb.model_ids, config_.weights);
      write_score_csv_rows(scores, rows, emb.model_ids);
    }
    write_text(artifact::pools, pools.str());
    write_text(artifact::scores, scores.str());
    return {artifact::pools, artifact::scores};
  }

  std::vector<std::string> mine() {
    const std::uint64_t seed = config_.require_seed();
    const Corpus corpus = load_corpus();
    const Embeddings emb = load_embeddings();
    const auto pools = load_pools();
    const auto split = split_queries(usable_queries(corpus, emb), seed, config_.test_fraction);

    std::unique_ptr<Bm25Index> bm25;
    const auto& kinds = config_.negative_kinds;
    if (std::count(kinds.begin(), kinds.end(), NegativeKind::bm25)) {
      std::vector<std::pair<std::string, std::vector<std::string>>> docs;
      for (const auto& id : emb.doc_ids) docs.emplace_back(id, terms(corpus.document(id).text));
      bm25 = std::make_unique<Bm25Index>(std::move(docs), config_.bm25);
    }

    std::map<NegativeKind, NegativeSets> sets;
    std::map<SelectionStage, std::size_t> stage_counts;
    std::vector<ScatterPoint> scatter;
    for (const auto& q : split.train) {
      auto pool_it = pools.find(q);
      if (pool_it == pools.end()) throw Error("no candidate pool for query '" + q + "'");
      const auto& pool = pool_it->second;
      const std::string positive = *corpus.positive_for(q);

      for (NegativeKind kind : kinds) {
        std::vector<std::string> picked;
        if (kind == NegativeKind::hard) {
          auto selection = mine_hard(q, positive, pool, corpus, emb, seed,
                                     scatter.empty() ? &scatter : nullptr);
          ++stage_counts[selection.stage];
          picked = std::move(selection.doc_ids);
        } else if (kind == NegativeKind::random) {
          picked = sample_random_negatives(emb.doc_ids, positive, config_.hard_negatives.m,
                                           derive_seed(seed, "random:" + q));
        } else {
          picked = bm25_negatives(*bm25, terms(corpus.query(q).text), positive,
                                  config_.hard_negatives.m);
        }
        if (picked.empty()) {
          log::warn("query '" + q + "' yields no " + std::string(to_string(kind)) + " negatives");
          continue;
        }
        sets[kind][q][kind] = std::move(picked);
      }
    }
    for (const auto& [stage, count] : stage_counts) {
      log::info("hard negatives from stage " + std::string(to_string(stage)) + ": " +
                std::to_string(count) + " queries");
    }

    std::vector<std::string> outputs;
    for (NegativeKind kind : kinds) {
      const auto triplets = build_triplets(corpus.qrels(), sets[kind]);
      if (triplets.empty()) throw Error("no " + std::string(to_string(kind)) + " triplets mined");
      std::ostringstream out;
      write_triplets_jsonl(out, triplets, corpus);
      write_text(artifact::triplets(to_string(kind)), out.str());
      outputs.push_back(artifact::triplets(to_string(kind)));
    }
    if (!scatter.empty()) {
      std::ostringstream out;
      write_scatter_csv(out, scatter);
      write_text(artifact::scatter, out.str());
      outputs.push_back(artifact::scatter);
    }
    return outputs;
  }

  HardNegativeSelection mine_hard(const std::string& q, const std::string& positive,
                                  const CandidatePool& pool, const Corpus& corpus,
                                  const Embeddings& emb, std::uint64_t seed,
                                  std::vector<ScatterPoint>* scatter) const {
    // Cluster the query, the positive and the pool in the joint space.
    std::map<std::string, std::vector<double>> points;
    const std::string query_key = "query:" + q;
    points[query_key] = emb.query(q);
    points["doc:" + positive] = emb.doc(positive);
    for (const auto& d : pool.doc_ids) points["doc:" + d] = emb.doc(d);

    std::map<std::string, std::size_t> labels;
    ClusteringConfig cc = config_.clustering;
    cc.k = std::min(cc.k, points.size());
    if (cc.k >= 2) {
      cc.seed = derive_seed(seed, "kmeans:" + q);
      labels = kmeans(points, cc).labels;
    }
    auto label = [&](const std::string& key) {
      auto it = labels.find(key);
      return it == labels.end() ? std::size_t{0} : it->second;
    };

    std::vector<HardNegativeCandidate> candidates;
    for (const auto& d : pool.doc_ids) {
      HardNegativeCandidate c;
      c.doc_id = d;
      for (const auto& m : emb.model_ids) {
        c.model_sim_query[m] = cosine(emb.queries.at(m, q), emb.docs.at(m, d));
        c.model_sim_positive[m] = cosine(emb.docs.at(m, positive), emb.docs.at(m, d));
      }
      c.sim_query = soft_vote(c.model_sim_query, config_.weights);
      c.sim_positive = soft_vote(c.model_sim_positive, config_.weights);
      c.cluster = label("doc:" + d);
      c.word_count = corpus.document(d).word_count;
      candidates.push_back(std::move(c));
    }
    HardNegativeConfig hc = config_.hard_negatives;
    hc.voting = config_.voting;
    auto selection = select_hard_negatives(candidates, positive, label("doc:" + positive),
                                           corpus.document(positive).word_count, hc);

    if (scatter) {
      const auto coords = project_2d(points);
      const std::set<std::string> hard(selection.doc_ids.begin(), selection.doc_ids.end());
      for (const auto& [key, xy] : coords) {
        ScatterPoint p;
        if (key == query_key) {
          p.id = q;
          p.role = "query";
        } else {
          p.id = key.substr(4);
          p.role = p.id == positive ? "positive" : hard.count(p.id) ? "hard_negative" : "candidate";
        }
        p.x = xy.first;
        p.y = xy.second;
        scatter->push_back(std::move(p));
      }
    }
    return selection;
  }

  std::vector<std::string> train_models() {
    const std::uint64_t seed = config_.require_seed();
    const Embeddings emb = load_embeddings();
    TrainConfig tc = config_.train;
    tc.seed = derive_seed(seed, "train");
    std::vector<std::string> outputs;
    for (const auto& kind : kind_names()) {
      std::vector<TripletVectors> vectors;
      for (const auto& r : read_triplets_jsonl(path(artifact::triplets(kind)))) {
        vectors.push_back({emb.query(r.triplet.query_id), emb.doc(r.triplet.positive_doc_id),
                           emb.doc(r.triplet.negative_doc_id)});
      }
      const auto result = train(vectors, tc);
      save_model(result.ranker, path(artifact::model(kind)));
      std::ostringstream loss;
      loss << "epoch,mean_loss\n";
      for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        loss << e + 1 << ',' << format_double(result.epoch_loss[e]) << '\n';
      }
      write_text(artifact::loss(kind), loss.str());
      log::info("trained " + kind + " ranker on " + std::to_string(vectors.size()) +
                " triplets; final epoch loss " + format_fixed(result.epoch_loss.back(), 4));
      outputs.push_back(artifact::model(kind));
      outputs.push_back(artifact::loss(kind));
    }
    return outputs;
  }

  std::vector<std::string> rerank_all() {
    const std::uint64_t seed = config_.require_seed();
    const Corpus corpus = load_corpus();
    const Embeddings emb = load_embeddings();
    const auto pools = load_pools();
    const auto split = split_queries(usable_queries(corpus, emb), seed, config_.test_fraction);

    std::map<std::string, std::vector<double>> doc_vectors;
    auto lookup = [&](const std::string& id) -> const std::vector<double>* {
      auto it = doc_vectors.find(id);
      if (it == doc_vectors.end()) {
        if (!emb.docs.find(emb.model_ids.front(), id)) return nullptr;
        it = doc_vectors.emplace(id, emb.doc(id)).first;
      }
      return &it->second;
    };

    std::vector<std::string> outputs;
    for (const auto& name : ranker_names()) {
      BilinearRanker ranker;
      if (name == kBaselineRanker) {
        const std::size_t dim = emb.doc(emb.doc_ids.front()).size();
        ranker = BilinearRanker::identity(dim, dim);
      } else {
        ranker = load_model(path(artifact::model(name)));
      }
      std::vector<RankedList> lists;
      for (const auto& q : split.test) {
        const auto& pool = pools.at(q);
        lists.push_back(rerank(ranker, q, emb.query(q), pool.doc_ids, lookup));
      }
      std::ostringstream out;
      write_ranked_jsonl(out, lists);
      write_text(artifact::ranked(name), out.str());
      outputs.push_back(artifact::ranked(name));
    }
    return outputs;
  }

  std::vector<std::string> evaluate() {
    const Corpus corpus = load_corpus();
    std::map<std::string, std::vector<EvalReport>> reports;
    std::vector<std::string> outputs;
    for (const auto& name : ranker_names()) {
      const auto lists = read_ranked_jsonl(path(artifact::ranked(name)));
      reports[name] = bucketed_report(lists, corpus, config_.eval_ks, config_.threshold_words);
      std::ostringstream out;
      write_report_csv(out, reports[name]);
      write_text(artifact::report(name), out.str());
      outputs.push_back(artifact::report(name));
    }
    for (const auto& [a, b] : comparison_pairs()) {
      std::ostringstream out;
      write_comparison_csv(out, compare_runs(reports.at(a), reports.at(b)));
      write_text(artifact::comparison(a, b), out.str());
      outputs.push_back(artifact::comparison(a, b));
    }
    return outputs;
  }

  void collect(RunSummary& summary) const {
    for (const auto& name : ranker_names()) {
      summary.reports[name] = read_report_csv(path(artifact::report(name)));
    }
    for (const auto& [a, b] : comparison_pairs()) {
      summary.comparisons[a + "_vs_" + b] = compare_runs(summary.reports.at(a), summary.reports.at(b));
    }
  }

  const PipelineConfig& config_;
  fs::path dir_;
  std::unique_ptr<DirLock> lock_;
  json manifest_ = json::object();
  json settings_;
};

}  // namespace

RunSummary run_pipeline(const PipelineConfig& config, std::span<const Stage> stages) {
  config.validate();
  if (config.output_dir.empty()) throw ConfigError("no output directory configured");
  Run run(config);
  return run.execute(stages);
}

RunSummary run_demo(PipelineConfig config) {
  const std::uint64_t seed = config.require_seed();
  config.validate();
  if (config.output_dir.empty()) throw ConfigError("no output directory configured");
  SyntheticConfig synthetic = config.synthetic;
  synthetic.seed = seed;
  const Corpus corpus = make_synthetic_benchmark(synthetic);
  const fs::path input = config.output_dir / "input";
  write_corpus(corpus, input);
  config.corpus_path = input;
  config.corpus_format = InputFormat::jsonl;
  return run_pipeline(config);
}

}  // namespace hardneg
