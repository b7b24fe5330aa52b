#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hardneg {

struct ClusteringConfig {
  std::size_t k = 5;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t restarts = 4;

  void validate() const;
};

struct ClusterAssignment {
  std::map<std::string, std::size_t> labels;  // point id -> cluster in [0, k)
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;  // sum of squared distances to assigned centroids
  // Inertia after each assignment step of the winning restart.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

// Lloyd's algorithm with seeded k-means++ initialisation, keeping the lowest
// inertia over `restarts` runs. Points are visited in id order so labels do not
// depend on insertion order. An empty cluster is reseeded at the point
// farthest from its centroid. Throws if there are fewer points than k.
ClusterAssignment kmeans(const std::map<std::string, std::vector<double>>& points,
                         const ClusteringConfig& config);

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hardneg
