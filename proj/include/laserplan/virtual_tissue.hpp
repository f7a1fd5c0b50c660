#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "laserplan/constraint.hpp"
#include "laserplan/grid.hpp"
#include "laserplan/laser_model.hpp"

namespace laserplan {

/// Ways the simulated tissue departs from the planning model. Both laws only
/// ever weaken the beam, so the plant never cuts deeper than predicted.
struct MismatchConfig {
  double defocus_coeff = 0.15;       // fractional energy loss per mm below the initial surface
  double debris_attenuation = 0.20;  // fractional loss per cut since the window was last cleaned
  int reset_every = 3;               // cuts between window cleanings

  static MismatchConfig none() { return {0.0, 0.0, 3}; }
  /// Throws InvalidArgument unless both coefficients lie in [0, 1) and reset_every >= 1.
  void validate() const;
};

struct Sphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;

  /// Height of the upper cap above (x, y), or nullopt outside the footprint.
  std::optional<double> top(double x, double y) const;
};

/// Ground-truth tissue evolved by cuts, observed through a noisy scan.
class VirtualTissue {
 public:
  VirtualTissue(HeightField initial, MismatchConfig mismatch = {}, double scan_noise_sigma = 0.02,
                std::vector<Sphere> embedded = {}, CutOptions options = {});

  const HeightField& truth() const { return truth_; }
  const HeightField& initial() const { return initial_; }
  const MismatchConfig& mismatch() const { return mismatch_; }
  double scan_noise_sigma() const { return noise_; }
  const std::vector<Sphere>& embedded() const { return embedded_; }
  const CutOptions& cut_options() const { return options_; }
  int cuts_since_reset() const { return since_reset_; }
  int cut_count() const { return cuts_; }

  /// Energy the tissue actually receives for a nominal delivered energy.
  double effective_energy(const CutInput& cut, double energy) const;

  /// Carves one cut into the truth. Throws OutsideWorkspace, or PlantFault if
  /// the cut reaches an embedded structure.
  void apply(const CutInput& cut, const LaserParams& params, const EnergyTable& table);

 private:
  HeightField initial_;
  HeightField truth_;
  MismatchConfig mismatch_;
  double noise_;
  std::vector<Sphere> embedded_;
  CutOptions options_;
  int since_reset_ = 0;
  int cuts_ = 0;
};

VirtualTissue plant_apply(VirtualTissue tissue, const CutInput& cut, const LaserParams& params,
                          const EnergyTable& table);

/// Truth plus i.i.d. Gaussian height noise, then a 3x3 median. Noise-free
/// scans return the truth untouched.
HeightField scan_surface(const VirtualTissue& tissue, std::mt19937_64& rng,
                         ExecutionPolicy policy = ExecutionPolicy::Sequential);

/// Square workspace of flat tissue centred on the origin.
struct Workspace {
  Eigen::Vector2d size{10.0, 10.0};  // mm
  double spacing = 0.05;             // mm
  double surface_height = 0.0;       // mm

  GridSpec grid() const;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  HeightField initial;
  HeightField target;
  ConstraintField constraint;
  std::vector<Sphere> embedded;

  /// Throws InvalidTarget if target rises above initial, InvalidGeometry if
  /// it dips below an active ceiling.
  void validate() const;
};

/// Flat tissue with a centred rectangular pocket of the given depth.
/// Throws DoesNotFit if the pocket leaves the workspace.
Scenario make_square_well(const Eigen::Vector2d& size, double depth, const Workspace& workspace = {});

/// Flat pocket bounded by a closed periodic spline through eight radii
/// r_k = mean_radius (1 + jitter u_k), u_k ~ U[-1, 1].
Scenario make_spline_tumor(double mean_radius, double jitter, double max_depth, std::uint64_t seed,
                           const Workspace& workspace = {});

/// Adds a buried sphere: the ceiling is the cap top plus clearance over the
/// sphere's footprint and the target is raised to respect it.
/// Throws InvalidGeometry if the ceiling reaches the initial surface.
Scenario make_subsurface_constraint(Scenario scenario, const Eigen::Vector3d& center, double radius,
                                    double clearance);

}  // namespace laserplan
