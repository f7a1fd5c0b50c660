#pragma once

#include <span>

#include <Eigen/Core>

#include "laserplan/point_cloud.hpp"

namespace laserplan {

/// Plane n . p = offset with unit normal n.
struct Plane {
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  double offset = 0.0;

  double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) - offset; }
};

/// Line through `point` with unit `direction`.
struct Line3 {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction{0.0, 0.0, 1.0};

  double distance(const Eigen::Vector3d& p) const;
};

/// Total-least-squares plane. The normal is oriented to +z; a normal lying in
/// the xy-plane is oriented to the first nonzero of +x, +y.
/// Throws DegenerateInput on fewer than 3 or collinear points.
Plane fit_plane(std::span<const Eigen::Vector3d> points);
inline Plane fit_plane(const PointCloud3& cloud) { return fit_plane(std::span<const Eigen::Vector3d>(cloud.points)); }

/// Total-least-squares line (principal axis). Direction oriented to +z.
/// Throws DegenerateInput on fewer than 2 distinct points.
Line3 fit_line(std::span<const Eigen::Vector3d> points);

}  // namespace laserplan
