#include "laserplan/virtual_tissue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "laserplan/error.hpp"
#include "laserplan/rng.hpp"

namespace laserplan {

void MismatchConfig::validate() const {
  const auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v < 1.0; };
  if (!unit(defocus_coeff) || !unit(debris_attenuation)) {
    throw Error(ErrorCode::InvalidArgument, "mismatch coefficients must lie in [0, 1)");
  }
  if (reset_every < 1) throw Error(ErrorCode::InvalidArgument, "reset_every must be >= 1");
}

std::optional<double> Sphere::top(double x, double y) const {
  const double d2 = (x - center.x()) * (x - center.x()) + (y - center.y()) * (y - center.y());
  if (d2 >= radius * radius) return std::nullopt;
  return center.z() + std::sqrt(radius * radius - d2);
}

VirtualTissue::VirtualTissue(HeightField initial, MismatchConfig mismatch, double scan_noise_sigma,
                             std::vector<Sphere> embedded, CutOptions options)
    : initial_(std::move(initial)),
      truth_(initial_),
      mismatch_(mismatch),
      noise_(scan_noise_sigma),
      embedded_(std::move(embedded)),
      options_(options) {
  mismatch_.validate();
  if (!std::isfinite(noise_) || noise_ < 0.0) throw Error(ErrorCode::InvalidArgument, "scan noise must be >= 0");
  if (!initial_.all_valid()) throw Error(ErrorCode::InvalidArgument, "tissue must be valid over the workspace");
}

double VirtualTissue::effective_energy(const CutInput& cut, double energy) const {
  const auto node = truth_.grid().nearest(cut.mu);
  if (!node) throw Error(ErrorCode::OutsideWorkspace, "incident point lies outside the workspace");
  const double depth = std::max(0.0, initial_(node->first, node->second) - truth_(node->first, node->second));
  return energy * std::pow(1.0 - mismatch_.defocus_coeff, depth) *
         std::pow(1.0 - mismatch_.debris_attenuation, since_reset_);
}

void VirtualTissue::apply(const CutInput& cut, const LaserParams& params, const EnergyTable& table) {
  validate_cut(truth_, cut, options_.tilt_limit_deg);
  const double energy = effective_energy(cut, energy_for_duty(table, cut.duty));
  truth_ = apply_crater(truth_, cut, params, energy, options_);
  ++cuts_;
  if (++since_reset_ >= mismatch_.reset_every) since_reset_ = 0;

  if (embedded_.empty()) return;
  const auto stamp = make_stamp(truth_.grid(), cut, params, energy, options_.tilt_model);
  const GridSpec& g = truth_.grid();
  for (int j = stamp.box.j0; j <= stamp.box.j1; ++j) {
    for (int i = stamp.box.i0; i <= stamp.box.i1; ++i) {
      for (const Sphere& s : embedded_) {
        const auto top = s.top(g.x(i), g.y(j));
        if (top && truth_(i, j) <= *top) throw Error(ErrorCode::PlantFault, "cut reached an embedded structure");
      }
    }
  }
}

VirtualTissue plant_apply(VirtualTissue tissue, const CutInput& cut, const LaserParams& params,
                          const EnergyTable& table) {
  tissue.apply(cut, params, table);
  return tissue;
}

HeightField scan_surface(const VirtualTissue& tissue, std::mt19937_64& rng, ExecutionPolicy policy) {
  if (tissue.scan_noise_sigma() == 0.0) return tissue.truth();
  HeightField noisy = tissue.truth();
  std::normal_distribution<double> noise(0.0, tissue.scan_noise_sigma());
  for (std::size_t k = 0; k < noisy.size(); ++k) noisy.at(k) += noise(rng);
  return policy == ExecutionPolicy::Parallel ? kernels::omp::median3x3(noisy) : kernels::serial::median3x3(noisy);
}

GridSpec Workspace::grid() const {
  if (!(spacing > 0.0) || !(size.x() > 0.0) || !(size.y() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "workspace needs positive size and spacing");
  }
  return GridSpec::covering(-0.5 * size, size, spacing);
}

void Scenario::validate() const {
  initial.require_same_grid(target, "scenario target");
  initial.require_same_grid(constraint.ceiling, "scenario constraint");
  for (std::size_t k = 0; k < initial.size(); ++k) {
    if (!initial.valid_at(k) || !target.valid_at(k)) continue;
    if (target.at(k) > initial.at(k) + 1e-12) throw Error(ErrorCode::InvalidTarget, "target above initial surface");
    if (constraint.active(k) && target.at(k) < constraint.ceiling.at(k)) {
      throw Error(ErrorCode::InvalidGeometry, "target below the constraint ceiling");
    }
  }
}

namespace {

Scenario flat(const std::string& name, std::uint64_t seed, const Workspace& ws) {
  const GridSpec g = ws.grid();
  Scenario s;
  s.name = name;
  s.seed = seed;
  s.initial = HeightField(g, ws.surface_height);
  s.target = s.initial;
  s.constraint = ConstraintField::none(g);
  return s;
}

// Uniform periodic Catmull-Rom through equally spaced polar radii.
double spline_radius(const std::vector<double>& r, double angle) {
  const int n = static_cast<int>(r.size());
  const double u = angle / (2.0 * std::numbers::pi) * n;
  const int k = static_cast<int>(std::floor(u));
  const double t = u - k;
  const auto at = [&](int q) { return r[static_cast<std::size_t>(((q % n) + n) % n)]; };
  const double p0 = at(k - 1), p1 = at(k), p2 = at(k + 1), p3 = at(k + 2);
  return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

}  // namespace

Scenario make_square_well(const Eigen::Vector2d& size, double depth, const Workspace& workspace) {
  if (!(size.x() > 0.0) || !(size.y() > 0.0) || !(depth >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "well needs positive size and nonnegative depth");
  }
  if (size.x() > workspace.size.x() || size.y() > workspace.size.y()) {
    throw Error(ErrorCode::DoesNotFit, "well is larger than the workspace");
  }
  Scenario s = flat("square_well", 0, workspace);
  const GridSpec& g = s.initial.grid();
  constexpr double kEdge = 1e-9;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (std::abs(g.x(i)) < 0.5 * size.x() - kEdge && std::abs(g.y(j)) < 0.5 * size.y() - kEdge) {
        s.target(i, j) -= depth;
      }
    }
  }
  return s;
}

Scenario make_spline_tumor(double mean_radius, double jitter, double max_depth, std::uint64_t seed,
                           const Workspace& workspace) {
  if (!(mean_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "mean radius must be positive");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw Error(ErrorCode::InvalidArgument, "jitter must lie in [0, 1)");
  if (!(max_depth >= 0.0)) throw Error(ErrorCode::InvalidArgument, "depth must be nonnegative");
  Scenario s = flat("spline_tumor", seed, workspace);
  auto rng = substream(seed, Stream::Scenario);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> radii(8);
  for (double& r : radii) r = mean_radius * (1.0 + jitter * u(rng));

  const GridSpec& g = s.initial.grid();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      double angle = std::atan2(y, x);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      if (std::hypot(x, y) < spline_radius(radii, angle)) s.target(i, j) -= max_depth;
    }
  }
  return s;
}

Scenario make_subsurface_constraint(Scenario scenario, const Eigen::Vector3d& center, double radius,
                                    double clearance) {
  if (!(radius > 0.0) || !(clearance >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive and clearance nonnegative");
  }
  const Sphere sphere{center, radius};
  const GridSpec& g = scenario.initial.grid();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const auto top = sphere.top(g.x(i), g.y(j));
      if (!top) continue;
      const std::size_t k = g.index(i, j);
      const double ceiling = *top + clearance;
      if (ceiling >= scenario.initial.at(k)) {
        throw Error(ErrorCode::InvalidGeometry, "structure plus clearance reaches the initial surface");
      }
      const double bound =
          scenario.constraint.active(k) ? std::max(scenario.constraint.ceiling.at(k), ceiling) : ceiling;
      scenario.constraint.ceiling.set(k, bound);
      scenario.target.at(k) = std::max(scenario.target.at(k), bound);
    }
  }
  scenario.embedded.push_back(sphere);
  scenario.validate();
  return scenario;
}

}  // namespace laserplan
