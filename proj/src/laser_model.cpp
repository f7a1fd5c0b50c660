#include "laserplan/laser_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "laserplan/error.hpp"

namespace laserplan {

void LaserParams::validate() const {
  if (!std::isfinite(A) || !std::isfinite(sigma) || !std::isfinite(P) || !std::isfinite(phi)) {
    throw Error(ErrorCode::InvalidArgument, "laser parameters must be finite");
  }
  if (!(A > 0.0) || !(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "A and sigma must be positive");
  if (P < 1.0) throw Error(ErrorCode::InvalidArgument, "sharpness P must be >= 1");
  if (phi < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold phi must be >= 0");
}

std::vector<EnergyEntry> EnergyTable::measured() {
  return {
      {20.0, 1.91, 0.016}, {30.0, 3.50, 0.014}, {40.0, 5.11, 0.033},  {50.0, 6.75, 0.030},  {60.0, 7.68, 0.064},
      {70.0, 8.29, 0.034}, {80.0, 9.31, 0.120}, {90.0, 10.03, 0.103}, {100.0, 11.05, 0.237},
  };
}

EnergyTable::EnergyTable(std::vector<EnergyEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::InvalidArgument, "energy table is empty");
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const auto& e = entries_[k];
    if (!(e.duty >= 0.0 && e.duty <= 100.0)) throw Error(ErrorCode::InvalidArgument, "duty cycle outside [0, 100]");
    if (!(e.mean_energy >= 0.0) || !(e.std_energy >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "energies must be nonnegative");
    }
    if (k > 0) {
      if (!(e.duty > entries_[k - 1].duty)) throw Error(ErrorCode::InvalidArgument, "duty cycles must increase");
      if (e.mean_energy < entries_[k - 1].mean_energy) {
        throw Error(ErrorCode::InvalidArgument, "energies must be nondecreasing in duty");
      }
    }
  }
}

double energy_for_duty(const EnergyTable& table, double duty) {
  const auto& e = table.entries();
  if (!(duty >= table.min_duty() && duty <= table.max_duty())) {
    throw Error(ErrorCode::OutOfRange, "duty " + std::to_string(duty) + "% outside the energy table");
  }
  auto hi = std::lower_bound(e.begin(), e.end(), duty, [](const EnergyEntry& a, double d) { return a.duty < d; });
  if (hi->duty == duty) return hi->mean_energy;
  const auto lo = hi - 1;
  const double t = (duty - lo->duty) / (hi->duty - lo->duty);
  return lo->mean_energy + t * (hi->mean_energy - lo->mean_energy);
}

double crater_depth(const LaserParams& params, double energy, double r) {
  const double u = r * r / (2.0 * params.sigma * params.sigma);
  const double up = u > 0.0 ? std::pow(u, params.P) : 0.0;
  return -params.A * std::max(0.0, energy * std::exp(-up) - params.phi);
}

double cutting_radius(const LaserParams& params, double energy) {
  if (energy <= params.phi) return 0.0;
  if (params.phi <= 0.0) return std::numeric_limits<double>::infinity();
  return params.sigma * std::sqrt(2.0 * std::pow(std::log(energy / params.phi), 1.0 / params.P));
}

Eigen::Vector3d beam_axis(const Eigen::Vector2d& theta_deg) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  return Eigen::Vector3d(std::tan(theta_deg.x() * kDeg), std::tan(theta_deg.y() * kDeg), 1.0).normalized();
}

kernels::CraterStamp make_stamp(const GridSpec& grid, const CutInput& cut, const LaserParams& params, double energy,
                                TiltModel model) {
  kernels::CraterStamp s;
  s.cx = cut.mu.x();
  s.cy = cut.mu.y();
  s.amplitude = params.A;
  s.sigma = params.sigma;
  s.sharpness = params.P;
  s.threshold = params.phi;
  double stretch = 1.0;
  if (model == TiltModel::BeamAligned) {
    const Eigen::Vector3d axis = beam_axis(cut.theta_deg);
    s.axis_x = axis.x();
    s.axis_y = axis.y();
    s.energy = energy * axis.z();
    stretch = 1.0 / axis.z();
  } else {
    s.energy = energy;
  }
  const double rc = cutting_radius(params, s.energy);
  if (rc == 0.0) return s;  // empty box
  if (!std::isfinite(rc)) {
    s.box = kernels::IndexBox::whole(grid);
    return s;
  }
  const double reach = rc * stretch;
  const auto lo_i = static_cast<int>(std::floor((s.cx - reach - grid.origin.x()) / grid.spacing.x()));
  const auto hi_i = static_cast<int>(std::ceil((s.cx + reach - grid.origin.x()) / grid.spacing.x()));
  const auto lo_j = static_cast<int>(std::floor((s.cy - reach - grid.origin.y()) / grid.spacing.y()));
  const auto hi_j = static_cast<int>(std::ceil((s.cy + reach - grid.origin.y()) / grid.spacing.y()));
  s.box = {std::max(0, lo_i), std::max(0, lo_j), std::min(grid.nx - 1, hi_i), std::min(grid.ny - 1, hi_j)};
  return s;
}

void validate_cut(const HeightField& surface, const CutInput& cut, double tilt_limit_deg) {
  constexpr double kSlack = 1e-12;
  if (!cut.theta_deg.allFinite() || std::abs(cut.theta_deg.x()) > tilt_limit_deg + kSlack ||
      std::abs(cut.theta_deg.y()) > tilt_limit_deg + kSlack) {
    throw Error(ErrorCode::InvalidArgument, "incident angle exceeds the tilt limit");
  }
  if (!cut.mu.allFinite()) throw Error(ErrorCode::OutsideWorkspace, "incident point is not finite");
  const auto node = surface.grid().nearest(cut.mu);
  if (!node || !surface.valid(node->first, node->second)) {
    throw Error(ErrorCode::OutsideWorkspace, "incident point lies outside the valid surface");
  }
}

HeightField apply_crater(const HeightField& surface, const CutInput& cut, const LaserParams& params, double energy,
                         const CutOptions& options) {
  validate_cut(surface, cut, options.tilt_limit_deg);
  HeightField out = surface;
  const auto stamp = make_stamp(surface.grid(), cut, params, energy, options.tilt_model);
  if (stamp.box.empty()) return out;
  if (options.policy == ExecutionPolicy::Parallel) {
    kernels::omp::stamp_crater(out, stamp);
  } else {
    kernels::serial::stamp_crater(out, stamp);
  }
  return out;
}

HeightField apply_cut(const HeightField& surface, const CutInput& cut, const LaserParams& params,
                      const EnergyTable& table, const CutOptions& options) {
  return apply_crater(surface, cut, params, energy_for_duty(table, cut.duty), options);
}

}  // namespace laserplan
