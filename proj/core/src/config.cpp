#include "hardneg/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "hardneg/util.hpp"

namespace hardneg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& object, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, _] : object.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& object, const char* key, T& target, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) return;
  try {
    target = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

ProviderSpec provider_from_json(const json& j, std::size_t index) {
  const std::string where = "providers[" + std::to_string(index) + "]";
  check_keys(j, {"model_id", "kind", "dim", "endpoint_url", "max_sequence_words", "seed",
                 "batch_size"},
             where);
  ProviderSpec p;
  read(j, "model_id", p.model_id, where);
  std::string kind = "hashing";
  read(j, "kind", kind, where);
  p.kind = parse_provider_kind(kind);
  read(j, "dim", p.dim, where);
  read(j, "endpoint_url", p.endpoint_url, where);
  read(j, "max_sequence_words", p.max_sequence_words, where);
  read(j, "seed", p.seed, where);
  read(j, "batch_size", p.batch_size, where);
  return p;
}

}  // namespace

void PipelineConfig::validate() const {
  if (providers.empty()) throw ConfigError("config needs at least one embedding provider");
  std::set<std::string> ids;
  for (const auto& p : providers) {
    p.validate();
    if (!ids.insert(p.model_id).second) {
      throw ConfigError("duplicate provider model_id '" + p.model_id + "'");
    }
  }
  for (const auto& [model, w] : weights) {
    if (!ids.count(model)) throw ConfigError("weight given for unknown provider '" + model + "'");
    if (!(w >= 0.0)) throw ConfigError("weight for provider '" + model + "' must be non-negative");
  }
  if (!weights.empty()) {
    double total = 0.0;
    for (const auto& p : providers) {
      auto it = weights.find(p.model_id);
      if (it == weights.end()) throw ConfigError("no weight for provider '" + p.model_id + "'");
      total += it->second;
    }
    if (total <= 0.0) throw ConfigError("provider weights are all zero");
  }
  if (retrieval_k < 1) throw ConfigError("retrieval k must be >= 1");
  clustering.validate();
  hard_negatives.validate();
  bm25.validate();
  if (negative_kinds.empty()) throw ConfigError("negative_kinds must name at least one kind");
  std::set<NegativeKind> kinds(negative_kinds.begin(), negative_kinds.end());
  if (kinds.size() != negative_kinds.size()) throw ConfigError("negative_kinds has duplicates");
  train.validate();
  if (eval_ks.empty()) throw ConfigError("eval ks must not be empty");
  for (std::size_t k : eval_ks) {
    if (k < 1) throw ConfigError("eval ks must be >= 1");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in [0, 1)");
  }
  synthetic.validate();
}

std::uint64_t PipelineConfig::require_seed() const {
  if (!seed) throw ConfigError("a global seed is required (set \"seed\" or pass --seed)");
  return *seed;
}

PipelineConfig config_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root,
             {"corpus", "providers", "ensemble", "retrieval", "clustering", "hard_negatives", "bm25",
              "negative_kinds", "train", "eval", "seed", "output_dir", "synthetic"},
             "config");
  PipelineConfig c;

  if (auto it = root.find("corpus"); it != root.end()) {
    check_keys(*it, {"path", "format"}, "corpus");
    std::string path, format = "jsonl";
    read(*it, "path", path, "corpus");
    read(*it, "format", format, "corpus");
    c.corpus_path = path;
    c.corpus_format = parse_input_format(format);
  }
  if (auto it = root.find("providers"); it != root.end()) {
    if (!it->is_array()) throw ConfigError("providers must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) c.providers.push_back(provider_from_json((*it)[i], i));
  }
  if (auto it = root.find("ensemble"); it != root.end()) {
    check_keys(*it, {"voting", "weights"}, "ensemble");
    std::string voting = "soft";
    read(*it, "voting", voting, "ensemble");
    c.voting = parse_voting_mode(voting);
    read(*it, "weights", c.weights, "ensemble");
  }
  if (auto it = root.find("retrieval"); it != root.end()) {
    check_keys(*it, {"k"}, "retrieval");
    read(*it, "k", c.retrieval_k, "retrieval");
  }
  if (auto it = root.find("clustering"); it != root.end()) {
    check_keys(*it, {"k", "max_iter", "tol", "restarts"}, "clustering");
    read(*it, "k", c.clustering.k, "clustering");
    read(*it, "max_iter", c.clustering.max_iter, "clustering");
    read(*it, "tol", c.clustering.tol, "clustering");
    read(*it, "restarts", c.clustering.restarts, "clustering");
  }
  if (auto it = root.find("hard_negatives"); it != root.end()) {
    check_keys(*it, {"m", "band", "rule"}, "hard_negatives");
    read(*it, "m", c.hard_negatives.m, "hard_negatives");
    if (auto band = it->find("band"); band != it->end()) {
      std::vector<double> b;
      read(*it, "band", b, "hard_negatives");
      if (b.size() != 2) throw ConfigError("hard_negatives.band must be [low, high]");
      c.hard_negatives.band_low = b[0];
      c.hard_negatives.band_high = b[1];
    }
    std::string rule = "mean";
    read(*it, "rule", rule, "hard_negatives");
    c.hard_negatives.rule = parse_hardness_rule(rule);
  }
  c.hard_negatives.voting = c.voting;
  if (auto it = root.find("bm25"); it != root.end()) {
    check_keys(*it, {"k1", "b"}, "bm25");
    read(*it, "k1", c.bm25.k1, "bm25");
    read(*it, "b", c.bm25.b, "bm25");
  }
  if (auto it = root.find("negative_kinds"); it != root.end()) {
    std::vector<std::string> names;
    read(root, "negative_kinds", names, "config");
    c.negative_kinds.clear();
    for (const auto& n : names) c.negative_kinds.push_back(parse_negative_kind(n));
  }
  if (auto it = root.find("train"); it != root.end()) {
    check_keys(*it,
               {"batch_size", "optimizer", "learning_rate", "dropout", "epochs", "margin",
                "warmup_fraction", "beta1", "beta2", "adam_epsilon"},
               "train");
    std::string optimizer = "adam";
    read(*it, "optimizer", optimizer, "train");
    if (optimizer != "adam") throw ConfigError("train.optimizer must be \"adam\"");
    read(*it, "batch_size", c.train.batch_size, "train");
    read(*it, "learning_rate", c.train.learning_rate, "train");
    read(*it, "dropout", c.train.dropout, "train");
    read(*it, "epochs", c.train.epochs, "train");
    read(*it, "margin", c.train.margin, "train");
    read(*it, "warmup_fraction", c.train.warmup_fraction, "train");
    read(*it, "beta1", c.train.beta1, "train");
    read(*it, "beta2", c.train.beta2, "train");
    read(*it, "adam_epsilon", c.train.adam_epsilon, "train");
  }
  if (auto it = root.find("eval"); it != root.end()) {
    check_keys(*it, {"ks", "threshold", "test_fraction"}, "eval");
    read(*it, "ks", c.eval_ks, "eval");
    read(*it, "threshold", c.threshold_words, "eval");
    read(*it, "test_fraction", c.test_fraction, "eval");
  }
  if (auto it = root.find("seed"); it != root.end() && !it->is_null()) {
    std::uint64_t seed = 0;
    read(root, "seed", seed, "config");
    c.seed = seed;
  }
  if (auto it = root.find("output_dir"); it != root.end()) {
    std::string dir;
    read(root, "output_dir", dir, "config");
    c.output_dir = dir;
  }
  if (auto it = root.find("synthetic"); it != root.end()) {
    check_keys(*it, {"n_queries", "confounders", "fillers", "long_fraction", "entities"},
               "synthetic");
    read(*it, "n_queries", c.synthetic.n_queries, "synthetic");
    read(*it, "confounders", c.synthetic.confounders, "synthetic");
    read(*it, "fillers", c.synthetic.fillers, "synthetic");
    read(*it, "long_fraction", c.synthetic.long_fraction, "synthetic");
    read(*it, "entities", c.synthetic.entities, "synthetic");
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_json(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const PipelineConfig& c, bool include_paths) {
  ordered_json j;
  if (include_paths) {
    j["corpus"] = {{"path", c.corpus_path.generic_string()}};
  }
  j["corpus"]["format"] = c.corpus_format == InputFormat::html   ? "html"
                          : c.corpus_format == InputFormat::text ? "text"
                                                                 : "jsonl";
  j["providers"] = ordered_json::array();
  for (const auto& p : c.providers) {
    ordered_json pj;
    pj["model_id"] = p.model_id;
    pj["kind"] = std::string(to_string(p.kind));
    pj["dim"] = p.dim;
    pj["endpoint_url"] = p.endpoint_url;
    pj["max_sequence_words"] = p.max_sequence_words;
    pj["seed"] = p.seed;
    pj["batch_size"] = p.batch_size;
    j["providers"].push_back(pj);
  }
  j["ensemble"]["voting"] = c.voting == VotingMode::soft ? "soft" : "hard";
  j["ensemble"]["weights"] = ordered_json::object();
  for (const auto& [m, w] : c.weights) j["ensemble"]["weights"][m] = w;
  j["retrieval"]["k"] = c.retrieval_k;
  j["clustering"] = {{"k", c.clustering.k},
                     {"max_iter", c.clustering.max_iter},
                     {"tol", c.clustering.tol},
                     {"restarts", c.clustering.restarts}};
  j["hard_negatives"] = {
      {"m", c.hard_negatives.m},
      {"band", {c.hard_negatives.band_low, c.hard_negatives.band_high}},
      {"rule", c.hard_negatives.rule == HardnessRule::mean ? "mean" : "min"}};
  j["bm25"] = {{"k1", c.bm25.k1}, {"b", c.bm25.b}};
  j["negative_kinds"] = ordered_json::array();
  for (auto k : c.negative_kinds) j["negative_kinds"].push_back(std::string(to_string(k)));
  j["train"] = {{"batch_size", c.train.batch_size},
                {"optimizer", "adam"},
                {"learning_rate", c.train.learning_rate},
                {"dropout", c.train.dropout},
                {"epochs", c.train.epochs},
                {"margin", c.train.margin},
                {"warmup_fraction", c.train.warmup_fraction},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"adam_epsilon", c.train.adam_epsilon}};
  j["eval"] = {{"ks", c.eval_ks},
               {"threshold", c.threshold_words},
               {"test_fraction", c.test_fraction}};
  j["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
  if (include_paths) j["output_dir"] = c.output_dir.generic_string();
  j["synthetic"] = {{"n_queries", c.synthetic.n_queries},
                    {"confounders", c.synthetic.confounders},
                    {"fillers", c.synthetic.fillers},
                    {"long_fraction", c.synthetic.long_fraction},
                    {"entities", c.synthetic.entities}};
  return j.dump(2) + "\n";
}

PipelineConfig demo_config() {
  PipelineConfig c;
  ProviderSpec a;
  a.model_id = "hash-a";
  a.dim = 512;
  a.seed = 11;
  ProviderSpec b = a;
  b.model_id = "hash-b";
  b.seed = 23;
  c.providers = {a, b};
  // Large epsilon turns Adam into momentum SGD, which stops it from inflating
  // the many rarely-updated coordinates of a 1024 x 1024 weight matrix.
  c.train.learning_rate = 2.0;
  c.train.adam_epsilon = 1.0;
  c.train.epochs = 10;
  c.seed = 42;
  c.output_dir = "hardneg-demo";
  return c;
}

}  // namespace hardneg
