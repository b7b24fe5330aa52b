#include "hardneg/projection.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hardneg/util.hpp"

namespace hardneg {

std::map<std::string, Point2d> project_2d(const std::map<std::string, std::vector<double>>& vectors) {
  if (vectors.size() < 2) throw Error("project_2d: needs at least two vectors");
  const auto rows = static_cast<Eigen::Index>(vectors.size());
  const auto cols = static_cast<Eigen::Index>(vectors.begin()->second.size());
  Eigen::MatrixXd data(rows, cols);
  Eigen::Index r = 0;
  for (const auto& [id, v] : vectors) {
    if (static_cast<Eigen::Index>(v.size()) != cols) {
      throw Error("project_2d: vector '" + id + "' has a different dimension");
    }
    data.row(r++) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), cols);
  }
  const Eigen::MatrixXd centred = data.rowwise() - data.colwise().mean();

  Eigen::MatrixXd components = Eigen::MatrixXd::Zero(cols, 2);
  if (centred.norm() > 0.0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    const Eigen::Index available = std::min<Eigen::Index>(2, svd.matrixV().cols());
    const double scale = svd.singularValues()(0);
    for (Eigen::Index c = 0; c < available; ++c) {
      // Numerically null directions carry no variance; leave them at zero.
      if (svd.singularValues()(c) <= 1e-12 * scale) continue;
      Eigen::VectorXd v = svd.matrixV().col(c);
      Eigen::Index pivot = 0;
      v.cwiseAbs().maxCoeff(&pivot);
      if (v(pivot) < 0.0) v = -v;
      components.col(c) = v;
    }
  }
  const Eigen::MatrixXd projected = centred * components;

  std::map<std::string, Point2d> out;
  r = 0;
  for (const auto& [id, _] : vectors) {
    out.emplace(id, Point2d{projected(r, 0), projected(r, 1)});
    ++r;
  }
  return out;
}

void write_scatter_csv(std::ostream& out, const std::vector<ScatterPoint>& points) {
  out << "id,role,x,y\n";
  for (const auto& p : points) {
    out << csv_escape(p.id) << ',' << csv_escape(p.role) << ',' << format_double(p.x) << ','
        << format_double(p.y) << '\n';
  }
}

}  // namespace hardneg
