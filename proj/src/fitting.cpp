#include "laserplan/fitting.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "laserplan/error.hpp"

namespace laserplan {

namespace {

struct Moments {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
};

Moments moments(std::span<const Eigen::Vector3d> points) {
  Moments m;
  for (const auto& p : points) m.centroid += p;
  m.centroid /= static_cast<double>(points.size());
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - m.centroid;
    m.scatter += d * d.transpose();
  }
  return m;
}

}  // namespace

double Line3::distance(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d d = p - point;
  return (d - d.dot(direction) * direction).norm();
}

Plane fit_plane(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateInput, "plane fit needs at least 3 points");
  const Moments m = moments(points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m.scatter);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  const double scale = std::max(ev(2), 1e-300);
  // Collinear: the two smallest spreads both vanish.
  if (ev(1) <= 1e-12 * scale || ev(2) <= 0.0) {
    throw Error(ErrorCode::DegenerateInput, "plane fit on collinear points");
  }
  Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
  constexpr double kTiny = 1e-12;
  if (n.z() < -kTiny || (std::abs(n.z()) <= kTiny && (n.x() < -kTiny || (std::abs(n.x()) <= kTiny && n.y() < 0.0)))) {
    n = -n;
  }
  return Plane{n, n.dot(m.centroid)};
}

Line3 fit_line(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 2) throw Error(ErrorCode::DegenerateInput, "line fit needs at least 2 points");
  const Moments m = moments(points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m.scatter);
  if (!(eig.eigenvalues()(2) > 0.0)) throw Error(ErrorCode::DegenerateInput, "line fit on coincident points");
  Eigen::Vector3d d = eig.eigenvectors().col(2).normalized();
  if (d.z() < 0.0) d = -d;
  return Line3{m.centroid, d};
}

}  // namespace laserplan
