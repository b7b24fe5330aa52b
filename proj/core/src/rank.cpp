#include "hardneg/rank.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "hardneg/util.hpp"

namespace hardneg {

namespace {

constexpr const char* kModelFormat = "hardneg-bilinear";
constexpr int kModelVersion = 1;

void require_dim(std::span<const double> v, std::size_t dim, const char* what) {
  if (v.size() != dim) {
    throw Error(std::string(what) + " has dim " + std::to_string(v.size()) + ", ranker expects " +
                std::to_string(dim));
  }
}

// Embeddings are often sparse (hashed bag of words), so the hot loops skip zeros.
std::vector<std::size_t> nonzero_indices(std::span<const double> v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) out.push_back(i);
  }
  return out;
}

struct LossAndResiduals {
  double loss = 0.0;
  double d_qp = 0.0;
  double d_qn = 0.0;
  std::vector<double> r_p;  // q - W p
  std::vector<double> r_n;  // q - W n
};

LossAndResiduals evaluate(const BilinearRanker& ranker, std::span<const double> q,
                          std::span<const double> p, std::span<const double> n, double margin) {
  LossAndResiduals out;
  out.r_p = ranker.transform(p);
  out.r_n = ranker.transform(n);
  double sp = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.r_p[i] = q[i] - out.r_p[i];
    out.r_n[i] = q[i] - out.r_n[i];
    sp += out.r_p[i] * out.r_p[i];
    sn += out.r_n[i] * out.r_n[i];
  }
  out.d_qp = std::sqrt(sp);
  out.d_qn = std::sqrt(sn);
  out.loss = triplet_loss(out.d_qp, out.d_qn, margin);
  return out;
}

// grad += dLoss/dW for one triplet; returns the loss.
double accumulate_gradient(const BilinearRanker& ranker, std::span<const double> q,
                           std::span<const double> p, std::span<const double> n, double margin,
                           std::vector<double>& grad) {
  const auto e = evaluate(ranker, q, p, n, margin);
  if (e.loss <= 0.0) return 0.0;
  const std::size_t qd = ranker.query_dim();
  const std::size_t dd = ranker.doc_dim();
  // d|q - W p|/dW = -(q - W p) p^T / |q - W p|; zero distance contributes a zero subgradient.
  const double cp = e.d_qp > 0.0 ? -1.0 / e.d_qp : 0.0;
  const double cn = e.d_qn > 0.0 ? 1.0 / e.d_qn : 0.0;
  const auto nz_p = nonzero_indices(p);
  const auto nz_n = nonzero_indices(n);
  for (std::size_t i = 0; i < qd; ++i) {
    const double ap = cp * e.r_p[i];
    const double an = cn * e.r_n[i];
    double* row = grad.data() + i * dd;
    for (std::size_t j : nz_p) row[j] += ap * p[j];
    for (std::size_t j : nz_n) row[j] += an * n[j];
  }
  return e.loss;
}

}  // namespace

BilinearRanker::BilinearRanker(std::size_t query_dim, std::size_t doc_dim)
    : query_dim_(query_dim), doc_dim_(doc_dim), weights_(query_dim * doc_dim, 0.0) {
  if (query_dim == 0 || doc_dim == 0) throw Error("ranker dimensions must be positive");
}

BilinearRanker::BilinearRanker(std::size_t query_dim, std::size_t doc_dim,
                               std::vector<double> weights)
    : query_dim_(query_dim), doc_dim_(doc_dim), weights_(std::move(weights)) {
  if (query_dim == 0 || doc_dim == 0) throw Error("ranker dimensions must be positive");
  if (weights_.size() != query_dim * doc_dim) {
    throw Error("ranker weight count does not match query_dim x doc_dim");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error("ranker weights must be finite");
  }
}

BilinearRanker BilinearRanker::identity(std::size_t query_dim, std::size_t doc_dim) {
  BilinearRanker r(query_dim, doc_dim);
  for (std::size_t i = 0; i < std::min(query_dim, doc_dim); ++i) r.at(i, i) = 1.0;
  return r;
}

std::vector<double> BilinearRanker::transform(std::span<const double> doc) const {
  require_dim(doc, doc_dim_, "document vector");
  const auto nz = nonzero_indices(doc);
  std::vector<double> out(query_dim_, 0.0);
  for (std::size_t i = 0; i < query_dim_; ++i) {
    const double* row = weights_.data() + i * doc_dim_;
    double sum = 0.0;
    for (std::size_t j : nz) sum += row[j] * doc[j];
    out[i] = sum;
  }
  return out;
}

double BilinearRanker::logit(std::span<const double> query, std::span<const double> doc) const {
  require_dim(query, query_dim_, "query vector");
  require_dim(doc, doc_dim_, "document vector");
  const auto nz = nonzero_indices(doc);
  double sum = 0.0;
  for (std::size_t i : nonzero_indices(query)) {
    const double* row = weights_.data() + i * doc_dim_;
    double wd = 0.0;
    for (std::size_t j : nz) wd += row[j] * doc[j];
    sum += query[i] * wd;
  }
  return sum;
}

double BilinearRanker::score(std::span<const double> query, std::span<const double> doc) const {
  return sigmoid(logit(query, doc));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double triplet_loss(double d_qp, double d_qn, double margin) {
  if (margin < 0.0) throw Error("triplet_loss: margin must be non-negative");
  return std::max(d_qp - d_qn + margin, 0.0);
}

double triplet_objective(const BilinearRanker& ranker, const TripletVectors& t, double margin) {
  require_dim(t.query, ranker.query_dim(), "query vector");
  return evaluate(ranker, t.query, t.positive, t.negative, margin).loss;
}

std::vector<double> triplet_gradient(const BilinearRanker& ranker, const TripletVectors& t,
                                     double margin) {
  require_dim(t.query, ranker.query_dim(), "query vector");
  std::vector<double> grad(ranker.query_dim() * ranker.doc_dim(), 0.0);
  accumulate_gradient(ranker, t.query, t.positive, t.negative, margin, grad);
  return grad;
}

GradCheckResult grad_check(const BilinearRanker& ranker, const TripletVectors& t, double margin,
                           double epsilon) {
  if (!(epsilon > 0.0)) throw Error("grad_check: epsilon must be positive");
  const auto analytic = triplet_gradient(ranker, t, margin);
  GradCheckResult result;
  result.vacuous = triplet_objective(ranker, t, margin) <= 0.0;
  BilinearRanker probe = ranker;
  auto weights = probe.weights();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double saved = weights[k];
    weights[k] = saved + epsilon;
    const double up = triplet_objective(probe, t, margin);
    weights[k] = saved - epsilon;
    const double down = triplet_objective(probe, t, margin);
    weights[k] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double scale = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(analytic[k] - numeric) / scale);
  }
  return result;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw ConfigError("warmup_fraction must lie in [0, 1]");
  }
}

double scheduled_rate(const TrainConfig& config, std::size_t step, std::size_t total_steps) {
  const auto warmup =
      static_cast<std::size_t>(std::floor(config.warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) {
    return config.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const double remaining = static_cast<double>(total_steps > step ? total_steps - step : 0);
  const double span = static_cast<double>(std::max<std::size_t>(1, total_steps - warmup));
  return config.learning_rate * remaining / span;
}

TrainResult train(std::span<const TripletVectors> triplets, const TrainConfig& config,
                  const BilinearRanker* initial) {
  config.validate();
  if (triplets.empty()) throw TrainingError("train: no triplets");
  const std::size_t qd = triplets.front().query.size();
  const std::size_t dd = triplets.front().positive.size();
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (t.query.size() != qd || t.positive.size() != dd || t.negative.size() != dd) {
      throw TrainingError("train: triplet " + std::to_string(i) + " has inconsistent dimensions");
    }
  }

  TrainResult result;
  result.ranker = initial ? *initial : BilinearRanker::identity(qd, dd);
  if (result.ranker.query_dim() != qd || result.ranker.doc_dim() != dd) {
    throw TrainingError("train: initial ranker dimensions do not match the triplets");
  }

  Rng rng(config.seed);
  const std::size_t n = triplets.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  const double keep = 1.0 - config.dropout;

  std::vector<double> grad(qd * dd), first(qd * dd, 0.0), second(qd * dd, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> q(qd), p(dd), neg(dd);

  auto drop = [&](const std::vector<double>& src, std::vector<double>& dst) {
    if (config.dropout <= 0.0) {
      dst = src;
      return;
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = rng.uniform() < keep ? src[i] / keep : 0.0;
    }
  };

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++step) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const auto& t = triplets[order[b]];
        drop(t.query, q);
        drop(t.positive, p);
        drop(t.negative, neg);
        batch_loss += accumulate_gradient(result.ranker, q, p, neg, config.margin, grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(step) + " (batch starting at triplet " +
                            std::to_string(start) + "); lower learning_rate");
      }
      epoch_sum += batch_loss;
      const double inv = 1.0 / static_cast<double>(end - start);
      const double rate = scheduled_rate(config, step, total_steps);
      const double t = static_cast<double>(step + 1);
      const double c1 = 1.0 - std::pow(config.beta1, t);
      const double c2 = 1.0 - std::pow(config.beta2, t);
      auto w = result.ranker.weights();
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double g = grad[k] * inv;
        first[k] = config.beta1 * first[k] + (1.0 - config.beta1) * g;
        second[k] = config.beta2 * second[k] + (1.0 - config.beta2) * g * g;
        w[k] -= rate * (first[k] / c1) / (std::sqrt(second[k] / c2) + config.adam_epsilon);
      }
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
  }
  for (double w : result.ranker.weights()) {
    if (!std::isfinite(w)) throw TrainingError("training diverged: non-finite weights");
  }
  return result;
}

RankedList rerank(const BilinearRanker& ranker, const std::string& query_id,
                  std::span<const double> query_vector, std::span<const std::string> candidates,
                  const VectorLookup& lookup) {
  struct Scored {
    const std::string* id;
    double logit;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& id : candidates) {
    const auto* v = lookup(id);
    if (!v) throw Error("rerank: missing embedding for document '" + id + "'");
    scored.push_back({&id, ranker.logit(query_vector, *v)});
  }
  // Order by the logit: sigmoid saturates to equal doubles for large logits.
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.logit != b.logit) return a.logit > b.logit;
    return *a.id < *b.id;
  });
  RankedList list;
  list.query_id = query_id;
  list.entries.reserve(scored.size());
  for (const auto& s : scored) list.entries.push_back({*s.id, sigmoid(s.logit)});
  return list;
}

std::string model_to_json(const BilinearRanker& ranker) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["query_dim"] = ranker.query_dim();
  j["doc_dim"] = ranker.doc_dim();
  j["weights"] = std::vector<double>(ranker.weights().begin(), ranker.weights().end());
  return j.dump() + "\n";
}

BilinearRanker model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.value("format", std::string{}) != kModelFormat) throw Error("not a hardneg model file");
  if (j.value("version", 0) != kModelVersion) {
    throw Error("unsupported model version " + std::to_string(j.value("version", 0)));
  }
  return BilinearRanker(j.at("query_dim").get<std::size_t>(), j.at("doc_dim").get<std::size_t>(),
                        j.at("weights").get<std::vector<double>>());
}

void save_model(const BilinearRanker& ranker, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(ranker));
}

BilinearRanker load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

}  // namespace hardneg
