// hardneg: command line front end for the mining / training / evaluation
// pipeline. Every stage subcommand works on a run directory; `train`, `eval`
// and `compare` also run standalone on explicit files.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "hardneg/config.hpp"
#include "hardneg/corpus.hpp"
#include "hardneg/embed.hpp"
#include "hardneg/eval.hpp"
#include "hardneg/negatives.hpp"
#include "hardneg/pipeline.hpp"
#include "hardneg/rank.hpp"
#include "hardneg/util.hpp"

namespace fs = std::filesystem;
using namespace hardneg;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c, const char* out_help) {
  app->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Global seed (overrides the config)");
  app->add_option("--out,--dir", c.out, out_help);
  app->add_flag("-v,--verbose", c.verbose, "Log progress");
}

PipelineConfig resolve(const Common& c, PipelineConfig base = {}) {
  PipelineConfig config = c.config_path.empty() ? std::move(base) : load_config(c.config_path);
  if (c.seed) config.seed = c.seed;
  if (!c.out.empty()) config.output_dir = c.out;
  return config;
}

void write_output(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

void print_summary(const RunSummary& summary) {
  for (const auto& s : summary.stages) {
    std::cout << to_string(s.stage) << ": " << (s.skipped ? "up to date" : "done") << '\n';
  }
  for (const auto& [name, rows] : summary.comparisons) {
    std::cout << '\n' << name << '\n';
    std::cout << "bucket  metric     k   run_a    run_b    delta\n";
    for (const auto& r : rows) {
      char line[128];
      std::snprintf(line, sizeof line, "%-7s %-10s %-3zu %-8s %-8s %s\n",
                    std::string(to_string(r.bucket)).c_str(), r.metric.c_str(), r.k,
                    format_fixed(r.run_a, 4).c_str(), format_fixed(r.run_b, 4).c_str(),
                    format_fixed(r.delta, 4).c_str());
      std::cout << line;
    }
  }
  if (!summary.run_dir.empty()) std::cout << "\nrun directory: " << summary.run_dir.string() << '\n';
}

// Standalone training: embed the triplet texts with the configured providers.
int train_standalone(const PipelineConfig& config, const std::string& triplets_path,
                     const std::string& model_path, const std::string& cache_path) {
  if (config.providers.empty()) throw ConfigError("training from a triplet file needs providers in --config");
  const auto records = read_triplets_jsonl(triplets_path);
  std::vector<std::string> texts;
  std::map<std::string, std::size_t> index;
  auto intern = [&](const std::string& t) {
    auto [it, inserted] = index.emplace(t, texts.size());
    if (inserted) texts.push_back(t);
    return it->second;
  };
  std::vector<std::array<std::size_t, 3>> ids;
  for (const auto& r : records) ids.push_back({intern(r.query), intern(r.pos), intern(r.neg)});

  std::unique_ptr<EmbeddingCache> cache;
  if (!cache_path.empty()) cache = std::make_unique<EmbeddingCache>(cache_path);
  auto providers = config.providers;
  std::sort(providers.begin(), providers.end(),
            [](const ProviderSpec& a, const ProviderSpec& b) { return a.model_id < b.model_id; });
  std::vector<std::vector<double>> joined(texts.size());
  for (const auto& spec : providers) {
    const auto vectors = embed_texts(spec, texts, cache.get());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      joined[i].insert(joined[i].end(), vectors[i].values.begin(), vectors[i].values.end());
    }
  }
  for (auto& v : joined) v = l2_normalize(v);

  std::vector<TripletVectors> triplets;
  for (const auto& t : ids) triplets.push_back({joined[t[0]], joined[t[1]], joined[t[2]]});
  TrainConfig tc = config.train;
  tc.seed = derive_seed(config.require_seed(), "train");
  const auto result = train(triplets, tc);
  save_model(result.ranker, model_path);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::cout << "epoch " << e + 1 << " loss " << format_fixed(result.epoch_loss[e], 6) << '\n';
  }
  return 0;
}

std::vector<QrelPair> read_qrels(const fs::path& path) {
  std::vector<QrelPair> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line);
    out.push_back({j.at("query_id").get<std::string>(), j.at("positive_doc_id").get<std::string>()});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-negative mining, triplet re-ranker training and ranking evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hardneg 0.3.0");

  // ingest
  Common ingest_opts;
  std::string ingest_input, ingest_format = "jsonl";
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert raw documents into corpus JSONL");
  ingest_cmd->add_option("--input", ingest_input, "File or directory")->required()->check(CLI::ExistingPath);
  ingest_cmd->add_option("--format", ingest_format, "html | text | jsonl");
  ingest_cmd->add_option("--out", ingest_opts.out, "Output corpus directory")->required();
  ingest_cmd->add_flag("-v,--verbose", ingest_opts.verbose);

  // pipeline stages over a run directory
  Common stage_opts;
  auto* embed_cmd = app.add_subcommand("embed", "Embed the run's corpus with every provider");
  add_common(embed_cmd, stage_opts, "Run directory");
  auto* score_cmd = app.add_subcommand("score", "Similarity matrices, pools and the ensemble score CSV");
  add_common(score_cmd, stage_opts, "Run directory");

  std::optional<std::size_t> k_retrieve, clusters, hard_m;
  std::vector<std::string> negative_kinds;
  auto* mine_cmd = app.add_subcommand("mine", "Pool candidates (score stage) and mine negatives");
  add_common(mine_cmd, stage_opts, "Run directory");
  mine_cmd->add_option("--k-retrieve", k_retrieve, "Top-k per model for the candidate pool");
  mine_cmd->add_option("--clusters", clusters, "K-Means cluster count");
  mine_cmd->add_option("--hard-m", hard_m, "Negatives per query");
  mine_cmd->add_option("--negative-kind", negative_kinds, "hard | random | bm25 (repeatable)");

  std::string triplets_path, model_out, cache_path;
  std::optional<std::size_t> epochs, batch;
  std::optional<double> margin, learning_rate;
  auto* train_cmd = app.add_subcommand(
      "train", "Train rankers: the run's triplet files, or one --triplets file into --model");
  add_common(train_cmd, stage_opts, "Run directory");
  train_cmd->add_option("--triplets", triplets_path, "Triplet JSONL (standalone mode)")->check(CLI::ExistingFile);
  train_cmd->add_option("--model", model_out, "Model file to write (standalone mode)");
  train_cmd->add_option("--cache", cache_path, "Embedding cache file (standalone mode)");
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--batch", batch);
  train_cmd->add_option("--margin", margin);
  train_cmd->add_option("--lr", learning_rate);

  auto* rerank_cmd = app.add_subcommand("rerank", "Re-rank held-out queries' pools with every ranker");
  add_common(rerank_cmd, stage_opts, "Run directory");

  std::string eval_run, eval_qrels, eval_corpus, eval_out;
  std::vector<std::size_t> eval_ks;
  std::optional<std::size_t> threshold;
  auto* eval_cmd = app.add_subcommand(
      "eval", "Evaluate the run's rankers, or one --run ranked list against --corpus");
  add_common(eval_cmd, stage_opts, "Run directory");
  eval_cmd->add_option("--run", eval_run, "Ranked-list JSONL (standalone mode)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus directory (document lengths, qrels)")
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--qrels", eval_qrels, "Qrels JSONL overriding the corpus qrels")->check(CLI::ExistingFile);
  eval_cmd->add_option("--ks", eval_ks, "Cutoffs")->delimiter(',');
  eval_cmd->add_option("--threshold", threshold, "Short/long boundary in words");
  eval_cmd->add_option("--report", eval_out, "Report CSV path (standalone mode; default stdout)");

  std::string compare_a, compare_b, compare_out;
  auto* compare_cmd = app.add_subcommand("compare", "Delta table between two report CSVs");
  compare_cmd->add_option("--a", compare_a)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--b", compare_b)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--out", compare_out, "Comparison CSV path (default stdout)");

  std::optional<std::size_t> demo_queries, demo_confounders;
  auto* demo_cmd = app.add_subcommand("demo", "Synthetic benchmark end to end");
  add_common(demo_cmd, stage_opts, "Run directory");
  demo_cmd->add_option("--queries", demo_queries);
  demo_cmd->add_option("--confounders", demo_confounders);

  auto* run_cmd = app.add_subcommand("run", "Every stage, ingest to eval");
  add_common(run_cmd, stage_opts, "Run directory");

  CLI11_PARSE(app, argc, argv);

  std::string current_stage;
  try {
    log::set_verbose(stage_opts.verbose || ingest_opts.verbose);

    if (ingest_cmd->parsed()) {
      current_stage = "ingest";
      const Corpus corpus = ingest(ingest_input, parse_input_format(ingest_format));
      write_corpus(corpus, ingest_opts.out);
      const auto stats = length_stats(corpus);
      std::cout << corpus.documents().size() << " documents (" << stats.short_count << " short, "
                << stats.long_count << " long), " << corpus.queries().size() << " queries, "
                << corpus.qrels().size() << " qrels\n";
      return 0;
    }

    if (compare_cmd->parsed()) {
      current_stage = "compare";
      const auto a = read_report_csv(compare_a);
      const auto b = read_report_csv(compare_b);
      std::ostringstream out;
      write_comparison_csv(out, compare_runs(a, b));
      write_output(compare_out, out.str());
      return 0;
    }

    if (demo_cmd->parsed()) {
      current_stage = "demo";
      PipelineConfig config = resolve(stage_opts, demo_config());
      if (demo_queries) config.synthetic.n_queries = *demo_queries;
      if (demo_confounders) config.synthetic.confounders = *demo_confounders;
      print_summary(run_demo(config));
      return 0;
    }

    PipelineConfig config = resolve(stage_opts);
    if (mine_cmd->parsed()) {
      if (k_retrieve) config.retrieval_k = *k_retrieve;
      if (clusters) config.clustering.k = *clusters;
      if (hard_m) config.hard_negatives.m = *hard_m;
      if (!negative_kinds.empty()) {
        config.negative_kinds.clear();
        for (const auto& k : negative_kinds) config.negative_kinds.push_back(parse_negative_kind(k));
      }
    }
    if (train_cmd->parsed()) {
      if (epochs) config.train.epochs = *epochs;
      if (batch) config.train.batch_size = *batch;
      if (margin) config.train.margin = *margin;
      if (learning_rate) config.train.learning_rate = *learning_rate;
      if (!triplets_path.empty()) {
        current_stage = "train";
        if (model_out.empty()) throw ConfigError("--triplets needs --model");
        config.train.validate();
        return train_standalone(config, triplets_path, model_out, cache_path);
      }
    }
    if (eval_cmd->parsed()) {
      if (!eval_ks.empty()) config.eval_ks = eval_ks;
      if (threshold) config.threshold_words = *threshold;
      if (!eval_run.empty()) {
        current_stage = "eval";
        if (eval_corpus.empty()) throw ConfigError("--run needs --corpus for document lengths");
        const Corpus corpus = read_corpus(eval_corpus);
        const auto qrels = eval_qrels.empty() ? corpus.qrels() : read_qrels(eval_qrels);
        std::map<std::string, std::size_t> words;
        for (const auto& q : qrels) words[q.query_id] = corpus.document(q.positive_doc_id).word_count;
        const auto lists = read_ranked_jsonl(eval_run);
        const auto reports = bucketed_report(lists, relevance_from_qrels(qrels), words,
                                             config.eval_ks, config.threshold_words);
        std::ostringstream out;
        write_report_csv(out, reports);
        write_output(eval_out, out.str());
        return 0;
      }
    }

    std::vector<Stage> stages;
    if (embed_cmd->parsed()) stages = {Stage::embed};
    if (score_cmd->parsed()) stages = {Stage::score};
    if (mine_cmd->parsed()) stages = {Stage::score, Stage::mine};
    if (train_cmd->parsed()) stages = {Stage::train};
    if (rerank_cmd->parsed()) stages = {Stage::rerank};
    if (eval_cmd->parsed()) stages = {Stage::eval};
    if (run_cmd->parsed()) stages.assign(all_stages().begin(), all_stages().end());
    print_summary(run_pipeline(config, stages));
    return 0;
  } catch (const StageError& e) {
    std::cerr << "hardneg: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hardneg: " << (current_stage.empty() ? "" : current_stage + ": ") << e.what() << '\n';
    return 1;
  }
}
