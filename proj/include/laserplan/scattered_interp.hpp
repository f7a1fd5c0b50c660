#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "laserplan/grid.hpp"
#include "laserplan/point_cloud.hpp"
#include "laserplan/triangulation.hpp"

namespace laserplan {

/// C1 piecewise-cubic Clough-Tocher interpolant over the Delaunay
/// triangulation of the (x, y) projections of scattered samples.
///
/// Vertex gradients come from the global curvature-minimizing estimate
/// (iterated 2x2 solves per vertex over its star) unless supplied.
class CloughTocherInterpolant {
 public:
  CloughTocherInterpolant(std::span<const Eigen::Vector2d> xy, std::span<const double> values);
  /// Uses caller-supplied gradients at every input sample.
  CloughTocherInterpolant(std::span<const Eigen::Vector2d> xy, std::span<const double> values,
                          std::span<const Eigen::Vector2d> gradients);

  /// Value at p, or nullopt outside the convex hull.
  std::optional<double> operator()(const Eigen::Vector2d& p) const;

  /// Samples the grid; nodes outside the hull are invalid.
  /// Throws EmptyOverlap if no node lies inside.
  HeightField sample(const GridSpec& grid) const;

  const Triangulation& triangulation() const { return tri_; }
  const std::vector<Eigen::Vector2d>& gradients() const { return grad_; }

 private:
  struct Patch {
    // Bernstein-Bezier ordinates of the three micro-cubics, indexed by
    // (i, j, k, l) multi-index; see evaluate().
    double c3000, c2100, c2010, c2001, c1200, c1101, c1020, c1011, c1002;
    double c0300, c0210, c0201, c0120, c0111, c0102, c0030, c0021, c0012, c0003;
  };

  void init(std::span<const double> values);
  void estimate_gradients();
  Patch build_patch(int t) const;
  static double evaluate(const Patch& patch, const Eigen::Vector3d& bary);

  Triangulation tri_;
  std::vector<double> f_;
  std::vector<Eigen::Vector2d> grad_;
  std::vector<Patch> patches_;
};

/// Interpolates the z of a point cloud onto `target`. Points sharing an (x, y)
/// location keep the first occurrence. Throws DegenerateInput (collinear or
/// < 3 points) or EmptyOverlap (hull misses grid).
HeightField interpolate_scattered(const PointCloud3& points, const GridSpec& target);

}  // namespace laserplan
