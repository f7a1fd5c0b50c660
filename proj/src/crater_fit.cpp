#include "laserplan/crater_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "laserplan/error.hpp"

namespace laserplan {

namespace {

enum Slot { kA = 0, kSigma, kP, kMuX, kMuY, kPhi, kSlots };
using Theta = Eigen::Matrix<double, kSlots, 1>;

struct Problem {
  std::vector<Eigen::Vector3d> points;  // current inliers
  double energy = 0.0;
  std::array<bool, kSlots> free{};
};

/// Model value and gradient w.r.t. all six slots.
double model_and_gradient(const Theta& t, double energy, const Eigen::Vector3d& p, Theta* grad) {
  const double a = t[kA], sigma = t[kSigma], sharp = t[kP], phi = t[kPhi];
  const double dx = p.x() - t[kMuX], dy = p.y() - t[kMuY];
  const double s = (dx * dx + dy * dy) / (2.0 * sigma * sigma);
  const double sp = s > 0.0 ? std::pow(s, sharp) : 0.0;
  const double g = std::exp(-sp);
  const double inner = energy * g - phi;
  if (inner <= 0.0) {
    if (grad) grad->setZero();
    return 0.0;
  }
  if (grad) {
    const double aeg = a * energy * g;
    (*grad)[kA] = -inner;
    (*grad)[kSigma] = -aeg * 2.0 * sharp * sp / sigma;
    (*grad)[kP] = s > 0.0 ? aeg * sp * std::log(s) : 0.0;
    // d(s^P)/dmu = -P s^(P-1) * d / sigma^2; s^(P-1) is finite at s = 0 for P >= 1.
    const double sp1 = s > 0.0 ? std::pow(s, sharp - 1.0) : (sharp == 1.0 ? 1.0 : 0.0);
    const double common = -aeg * sharp * sp1 / (sigma * sigma);
    (*grad)[kMuX] = common * dx;
    (*grad)[kMuY] = common * dy;
    (*grad)[kPhi] = a;
  }
  return -a * inner;
}

double objective(const Problem& pb, const Theta& t) {
  double s = 0.0;
  for (const auto& p : pb.points) {
    const double r = p.z() - model_and_gradient(t, pb.energy, p, nullptr);
    s += r * r;
  }
  return s;
}

void project(Theta& t) {
  t[kA] = std::max(t[kA], 1e-9);
  t[kSigma] = std::max(t[kSigma], 1e-6);
  t[kP] = std::clamp(t[kP], 1.0, 500.0);
  t[kPhi] = std::max(t[kPhi], 0.0);
}

struct LmOutcome {
  Theta theta;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

// Levenberg-Marquardt with Marquardt diagonal scaling and Nielsen's damping
// update; box constraints by projection of each trial point.
LmOutcome levenberg_marquardt(const Problem& pb, Theta theta, int max_iterations) {
  std::vector<int> idx;
  for (int k = 0; k < kSlots; ++k) {
    if (pb.free[k]) idx.push_back(k);
  }
  const int m = static_cast<int>(idx.size());
  LmOutcome out;
  out.theta = theta;
  out.cost = objective(pb, theta);
  out.history.push_back(out.cost);

  Eigen::MatrixXd jtj(m, m);
  Eigen::VectorXd jtr(m);
  auto linearize = [&](const Theta& t) {
    jtj.setZero();
    jtr.setZero();
    Theta grad;
    Eigen::VectorXd row(m);
    for (const auto& p : pb.points) {
      const double r = p.z() - model_and_gradient(t, pb.energy, p, &grad);
      for (int a = 0; a < m; ++a) row[a] = grad[idx[a]];
      jtj.selfadjointView<Eigen::Lower>().rankUpdate(row);
      jtr += row * r;
    }
    jtj = jtj.selfadjointView<Eigen::Lower>();
  };

  linearize(out.theta);
  double lambda = 1e-3 * std::max(jtj.diagonal().maxCoeff(), 1e-300);
  double nu = 2.0;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    if (out.cost <= 1e-30 || jtr.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, out.cost)) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12 * std::max(jtj.diagonal().maxCoeff(), 1e-300));
    Eigen::MatrixXd lhs = jtj;
    lhs.diagonal() += lambda * diag;
    const Eigen::VectorXd step = lhs.ldlt().solve(jtr);
    Theta trial = out.theta;
    for (int a = 0; a < m; ++a) trial[idx[a]] += step[a];
    project(trial);
    Eigen::VectorXd taken(m);
    for (int a = 0; a < m; ++a) taken[a] = trial[idx[a]] - out.theta[idx[a]];

    const double trial_cost = objective(pb, trial);
    const double predicted = taken.dot(lambda * diag.cwiseProduct(taken) + jtr);
    const double rho = predicted > 0.0 ? (out.cost - trial_cost) / predicted : -1.0;
    if (trial_cost < out.cost && rho > 0.0) {
      const double previous = out.cost;
      double rel_step = 0.0;
      for (int a = 0; a < m; ++a) {
        rel_step = std::max(rel_step, std::abs(taken[a]) / (std::abs(out.theta[idx[a]]) + 1e-12));
      }
      out.theta = trial;
      out.cost = trial_cost;
      out.history.push_back(trial_cost);
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (rel_step < 1e-13 || previous - trial_cost <= 1e-14 * previous) {
        out.converged = true;
        break;
      }
      linearize(out.theta);
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (lambda > 1e20 * std::max(jtj.diagonal().maxCoeff(), 1.0)) {
        // No descent direction left at machine precision: stationary point.
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

std::vector<int> inliers(const std::vector<Eigen::Vector3d>& pts, const Theta& t, double region) {
  std::vector<int> in;
  const double r2 = std::pow(region * t[kSigma], 2);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double dx = pts[k].x() - t[kMuX], dy = pts[k].y() - t[kMuY];
    if (dx * dx + dy * dy <= r2) in.push_back(static_cast<int>(k));
  }
  return in;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

double crater_model(const LaserParams& params, const Eigen::Vector2d& mu, double energy, double x, double y) {
  Theta t;
  t << params.A, params.sigma, params.P, mu.x(), mu.y(), params.phi;
  return model_and_gradient(t, energy, Eigen::Vector3d(x, y, 0.0), nullptr);
}

FitResult fit_crater(const PointCloud3& cloud, double energy, const FitOptions& options) {
  cloud.validate();
  if (cloud.size() < 50) throw Error(ErrorCode::DegenerateInput, "crater fit needs at least 50 points");
  if (!(energy > 0.0) || !std::isfinite(energy)) throw Error(ErrorCode::InvalidArgument, "energy must be positive");
  if (!(energy > options.phi)) throw Error(ErrorCode::DegenerateInput, "energy does not exceed the threshold");
  const auto& pts = cloud.points;

  // Robust level/noise from the upper half of the cloud, where the
  // undisturbed surface dominates.
  std::vector<double> z(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) z[k] = pts[k].z();
  const double level = median(z);
  std::vector<double> upper_dev;
  for (double v : z) {
    if (v >= level) upper_dev.push_back(v - level);
  }
  const double noise = 1.4826 * median(upper_dev);
  // Bottom as the 1% quantile so isolated noise spikes do not count as depth.
  std::vector<double> sorted = z;
  const auto q = static_cast<std::ptrdiff_t>(sorted.size() / 100);
  std::nth_element(sorted.begin(), sorted.begin() + q, sorted.end());
  const double bottom = sorted[static_cast<std::size_t>(q)];
  const double depth_range = level - bottom;
  if (depth_range <= 3.0 * noise) throw Error(ErrorCode::DegenerateInput, "crater depth is within the noise");
  const double max_depth = -bottom;
  if (!(max_depth > 0.0)) throw Error(ErrorCode::DegenerateInput, "cloud has no crater below z = 0");

  // Depth-weighted centroid over points clearly below the noise floor.
  Eigen::Vector2d mu0 = Eigen::Vector2d::Zero();
  double wsum = 0.0;
  for (const auto& p : pts) {
    const double w = std::max(0.0, -p.z() - 3.0 * noise);
    mu0 += w * p.head<2>();
    wsum += w;
  }
  mu0 /= wsum;
  double r2sum = 0.0;
  std::size_t nhalf = 0;
  for (const auto& p : pts) {
    if (-p.z() >= 0.5 * max_depth) {
      r2sum += (p.head<2>() - mu0).squaredNorm();
      ++nhalf;
    }
  }
  const double r_half = std::sqrt(2.0 * r2sum / static_cast<double>(nhalf));

  Problem pb;
  pb.energy = energy;
  pb.free = {true, true, true, true, true, options.fit_phi};
  double p0 = 2.0;
  if (options.model == CraterModel::Gaussian) {
    p0 = 1.0;
    pb.free[kP] = false;
  } else if (options.fix_P) {
    p0 = *options.fix_P;
    pb.free[kP] = false;
  }
  if (p0 < 1.0) throw Error(ErrorCode::InvalidArgument, "fixed P must be >= 1");
  const double phi = options.phi;
  const double s_half = std::pow(std::log(2.0 * energy / (energy + phi)), 1.0 / p0);
  Theta theta;
  theta << max_depth / (energy - phi), r_half / std::sqrt(2.0 * s_half), p0, mu0.x(), mu0.y(), phi;

  FitResult result;
  std::vector<int> current = inliers(pts, theta, options.region_sigmas);
  const auto free_count = static_cast<std::size_t>(std::count(pb.free.begin(), pb.free.end(), true));
  bool converged = true;
  for (int round = 0; round < options.max_rounds; ++round) {
    if (current.size() <= free_count) throw Error(ErrorCode::DegenerateInput, "too few points inside the fit region");
    pb.points.clear();
    for (int k : current) pb.points.push_back(pts[k]);
    LmOutcome lm = levenberg_marquardt(pb, theta, options.max_iterations);
    result.iterations += lm.iterations;
    result.cost_history.push_back(std::move(lm.history));
    result.rounds = round + 1;
    theta = lm.theta;
    converged = lm.converged;
    if (!converged) break;
    std::vector<int> next = inliers(pts, theta, options.region_sigmas);
    if (next == current) {
      result.inliers_stable = true;
      break;
    }
    current = std::move(next);
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence,
                "Levenberg-Marquardt did not converge in " + std::to_string(options.max_iterations) + " steps");
  }

  result.converged = true;
  result.params = LaserParams{theta[kA], theta[kSigma], theta[kP], theta[kPhi]};
  result.mu = {theta[kMuX], theta[kMuY]};
  result.inlier_count = pb.points.size();
  double ss = 0.0;
  for (const auto& p : pb.points) {
    const double r = p.z() - model_and_gradient(theta, energy, p, nullptr);
    result.residuals.push_back(r);
    ss += r * r;
  }
  result.rmse = std::sqrt(ss / static_cast<double>(pb.points.size()));
  return result;
}

}  // namespace laserplan
