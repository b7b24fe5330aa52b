#include "hardneg/kmeans.hpp"

#include <cmath>
#include <limits>

#include "hardneg/util.hpp"

namespace hardneg {

void ClusteringConfig::validate() const {
  if (k < 2) throw ConfigError("clustering k must be >= 2");
  if (max_iter == 0) throw ConfigError("clustering max_iter must be positive");
  if (!(tol >= 0.0)) throw ConfigError("clustering tol must be non-negative");
  if (restarts == 0) throw ConfigError("clustering restarts must be positive");
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

namespace {

using Matrix = std::vector<std::vector<double>>;

struct LloydResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> history;
  std::size_t iterations = 0;
};

Matrix kmeanspp_init(const Matrix& x, std::size_t k, Rng& rng) {
  Matrix centroids;
  centroids.reserve(k);
  centroids.push_back(x[rng.index(x.size())]);
  std::vector<double> d2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d2[i] = squared_distance(x[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.index(x.size());
    } else {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      pick = x.size();
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (d2[i] <= 0.0) continue;
        cumulative += d2[i];
        pick = i;
        if (cumulative > target) break;
      }
    }
    centroids.push_back(x[pick]);
    for (std::size_t i = 0; i < x.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(x[i], centroids.back()));
    }
  }
  return centroids;
}

// Nearest-centroid assignment (ties to the lowest index) followed by empty
// cluster repair. Returns the resulting inertia.
double assign(const Matrix& x, Matrix& centroids, std::vector<std::size_t>& labels) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> counts(k, 0);
  std::vector<double> cost(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = squared_distance(x[i], centroids[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    labels[i] = best_j;
    cost[i] = best;
    ++counts[best_j];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) continue;
    std::size_t far = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (counts[labels[i]] < 2) continue;
      if (far == x.size() || cost[i] > cost[far]) far = i;
    }
    centroids[j] = x[far];
    --counts[labels[far]];
    labels[far] = j;
    ++counts[j];
    cost[far] = 0.0;
  }
  double inertia = 0.0;
  for (double c : cost) inertia += c;
  return inertia;
}

LloydResult lloyd(const Matrix& x, Matrix centroids, const ClusteringConfig& config) {
  const std::size_t k = centroids.size();
  const std::size_t dim = x.front().size();
  LloydResult r;
  r.labels.assign(x.size(), 0);
  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    r.history.push_back(assign(x, centroids, r.labels));
    Matrix means(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto& m = means[r.labels[i]];
      for (std::size_t d = 0; d < dim; ++d) m[d] += x[i][d];
      ++counts[r.labels[i]];
    }
    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      for (auto& v : means[j]) v /= static_cast<double>(counts[j]);
      movement = std::max(movement, std::sqrt(squared_distance(means[j], centroids[j])));
    }
    centroids = std::move(means);
    r.iterations = iter + 1;
    if (movement <= config.tol) break;
  }
  r.inertia = assign(x, centroids, r.labels);
  r.history.push_back(r.inertia);
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

ClusterAssignment kmeans(const std::map<std::string, std::vector<double>>& points,
                         const ClusteringConfig& config) {
  config.validate();
  if (points.size() < config.k) {
    throw Error("kmeans: " + std::to_string(points.size()) + " points cannot form " +
                std::to_string(config.k) + " clusters");
  }
  std::vector<std::string> ids;
  Matrix x;
  ids.reserve(points.size());
  x.reserve(points.size());
  for (const auto& [id, v] : points) {
    if (!x.empty() && v.size() != x.front().size()) {
      throw Error("kmeans: point '" + id + "' has a different dimension");
    }
    for (double value : v) {
      if (!std::isfinite(value)) throw Error("kmeans: point '" + id + "' is not finite");
    }
    ids.push_back(id);
    x.push_back(v);
  }
  if (x.front().empty()) throw Error("kmeans: zero-dimensional points");

  Rng rng(config.seed);
  LloydResult best;
  for (std::size_t restart = 0; restart < config.restarts; ++restart) {
    auto result = lloyd(x, kmeanspp_init(x, config.k, rng), config);
    if (restart == 0 || result.inertia < best.inertia) best = std::move(result);
  }

  ClusterAssignment out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.labels.emplace(ids[i], best.labels[i]);
  out.centroids = std::move(best.centroids);
  out.inertia = best.inertia;
  out.inertia_history = std::move(best.history);
  out.iterations = best.iterations;
  return out;
}

}  // namespace hardneg
