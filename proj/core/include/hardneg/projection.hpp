#pragma once

#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace hardneg {

using Point2d = std::pair<double, double>;

// Projection onto the top two principal components of the mean-centred set.
// Each component's largest-magnitude loading is made positive. A set of
// identical points maps to the origin. Needs at least two vectors.
std::map<std::string, Point2d> project_2d(const std::map<std::string, std::vector<double>>& vectors);

struct ScatterPoint {
  std::string id;
  std::string role;  // query | positive | hard_negative | candidate
  double x = 0.0;
  double y = 0.0;
};

// id,role,x,y
void write_scatter_csv(std::ostream& out, const std::vector<ScatterPoint>& points);

}  // namespace hardneg
