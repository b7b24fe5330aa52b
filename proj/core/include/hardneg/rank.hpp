#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hardneg {

struct RankedEntry {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

/// Documents for one query, best first.
struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;
};

/// score(q, d) = sigmoid(q^T W d). The learned document representation used by
/// the triplet objective is W d.
class BilinearRanker {
 public:
  BilinearRanker() = default;
  BilinearRanker(std::size_t query_dim, std::size_t doc_dim);  // W = 0
  BilinearRanker(std::size_t query_dim, std::size_t doc_dim, std::vector<double> weights);

  // Identity when square, truncated identity otherwise.
  static BilinearRanker identity(std::size_t query_dim, std::size_t doc_dim);

  std::size_t query_dim() const noexcept { return query_dim_; }
  std::size_t doc_dim() const noexcept { return doc_dim_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> weights() noexcept { return weights_; }
  double& at(std::size_t row, std::size_t col) { return weights_[row * doc_dim_ + col]; }
  double at(std::size_t row, std::size_t col) const { return weights_[row * doc_dim_ + col]; }

  std::vector<double> transform(std::span<const double> doc) const;  // W d
  double logit(std::span<const double> query, std::span<const double> doc) const;
  double score(std::span<const double> query, std::span<const double> doc) const;

  bool operator==(const BilinearRanker&) const = default;

 private:
  std::size_t query_dim_ = 0;
  std::size_t doc_dim_ = 0;
  std::vector<double> weights_;  // row-major query_dim x doc_dim
};

double sigmoid(double x);

// Euclidean distance; throws on dimension mismatch.
double distance(std::span<const double> a, std::span<const double> b);

// max(d_qp - d_qn + margin, 0); throws on a negative margin.
double triplet_loss(double d_qp, double d_qn, double margin = 1.0);

struct TripletVectors {
  std::vector<double> query;
  std::vector<double> positive;
  std::vector<double> negative;
};

// Loss of one triplet under the ranker: d_qp = |q - W p|, d_qn = |q - W n|.
double triplet_objective(const BilinearRanker& ranker, const TripletVectors& t, double margin);

// dLoss/dW (row-major), zero in the inactive hinge region.
std::vector<double> triplet_gradient(const BilinearRanker& ranker, const TripletVectors& t,
                                     double margin);

struct GradCheckResult {
  double max_relative_error = 0.0;
  bool vacuous = false;  // inactive hinge: both gradients identically zero
};

// Analytic gradient against central differences (f(w+e) - f(w-e)) / 2e over
// every weight. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult grad_check(const BilinearRanker& ranker, const TripletVectors& t, double margin,
                           double epsilon);

struct TrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 3e-5;
  double dropout = 0.2;  // input-coordinate dropout, training only
  std::size_t epochs = 20;
  double margin = 1.0;
  double warmup_fraction = 0.1;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

// Linear warmup over the first warmup steps, then linear decay to zero.
double scheduled_rate(const TrainConfig& config, std::size_t step, std::size_t total_steps);

struct TrainResult {
  BilinearRanker ranker;
  std::vector<double> epoch_loss;  // mean triplet loss seen during each epoch
};

// Adam on the mean triplet loss over seeded mini-batches, starting from
// `initial` (the identity when empty). Single-threaded and bitwise
// deterministic for a fixed seed. Throws TrainingError on a non-finite loss.
TrainResult train(std::span<const TripletVectors> triplets, const TrainConfig& config,
                  const BilinearRanker* initial = nullptr);

// Candidates by descending score (ties by ascending id). `lookup` returns the
// document vector or nullptr; a missing vector throws naming the document.
using VectorLookup = std::function<const std::vector<double>*(const std::string&)>;
RankedList rerank(const BilinearRanker& ranker, const std::string& query_id,
                  std::span<const double> query_vector, std::span<const std::string> candidates,
                  const VectorLookup& lookup);

// {"format", "version", "query_dim", "doc_dim", "weights"} with round-trip
// exact doubles.
void save_model(const BilinearRanker& ranker, const std::filesystem::path& path);
BilinearRanker load_model(const std::filesystem::path& path);
std::string model_to_json(const BilinearRanker& ranker);
BilinearRanker model_from_json(std::string_view json);

}  // namespace hardneg
