#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "laserplan/laser_model.hpp"
#include "laserplan/point_cloud.hpp"

namespace laserplan {

enum class CraterModel { Gaussian, SuperGaussian };

struct FitOptions {
  CraterModel model = CraterModel::SuperGaussian;
  std::optional<double> fix_P;
  /// Threshold energy: held at `phi` unless fit_phi is set.
  double phi = 1.939;
  bool fit_phi = false;
  int max_iterations = 200;  // LM steps per round
  int max_rounds = 10;       // inlier-set refinements
  double region_sigmas = 2.0;
};

struct FitResult {
  LaserParams params;
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  double rmse = 0.0;  // over the final inlier set
  int iterations = 0;  // LM steps, all rounds
  bool converged = false;
  int rounds = 0;
  bool inliers_stable = false;
  std::size_t inlier_count = 0;
  /// Objective after the initial evaluation and every accepted step, per round.
  std::vector<std::vector<double>> cost_history;
  /// z_obs - z_fit over the final inlier set.
  std::vector<double> residuals;
};

/// Levenberg-Marquardt fit of the crater model to a leveled crater cloud
/// (undisturbed surface at z = 0, craters negative), restricted to points
/// within region_sigmas * sigma of the current center and refit until that
/// set stops changing.
///
/// Throws DegenerateInput (too few points, flat cloud, E <= phi) or
/// NoConvergence.
FitResult fit_crater(const PointCloud3& cloud, double energy, const FitOptions& options = {});

/// Model depth at (x, y) for a crater centred at mu.
double crater_model(const LaserParams& params, const Eigen::Vector2d& mu, double energy, double x, double y);

}  // namespace laserplan
