#pragma once

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "laserplan/grid.hpp"
#include "laserplan/rigid_transform.hpp"

namespace laserplan::test {

inline GridSpec square_grid(double half, double spacing) {
  return GridSpec::covering({-half, -half}, {2 * half, 2 * half}, spacing);
}

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline RigidTransform random_transform(std::mt19937_64& rng, double min_angle, double max_angle, double max_t) {
  std::uniform_real_distribution<double> ang(min_angle, max_angle);
  std::uniform_real_distribution<double> t(-max_t, max_t);
  return RigidTransform::from_axis_angle(random_unit(rng), ang(rng), Eigen::Vector3d(t(rng), t(rng), t(rng)));
}

inline double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) { return (a - b).norm(); }

}  // namespace laserplan::test

#include "laserplan/point_cloud.hpp"

namespace laserplan::test {

/// Leveled crater scan on a square lattice, formula written out directly.
inline PointCloud3 synthetic_crater(double a, double sigma, double p, double phi, double energy,
                                    const Eigen::Vector2d& mu, double half_extent, double spacing,
                                    double noise_sigma = 0.0, unsigned seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  PointCloud3 c;
  const int n = static_cast<int>(std::lround(2.0 * half_extent / spacing));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = mu.x() - half_extent + i * spacing;
      const double y = mu.y() - half_extent + j * spacing;
      const double r2 = (x - mu.x()) * (x - mu.x()) + (y - mu.y()) * (y - mu.y());
      const double v = energy * std::exp(-std::pow(r2 / (2.0 * sigma * sigma), p)) - phi;
      double z = v > 0.0 ? -a * v : 0.0;
      if (noise_sigma > 0.0) z += noise(rng);
      c.points.emplace_back(x, y, z);
    }
  }
  return c;
}

}  // namespace laserplan::test
