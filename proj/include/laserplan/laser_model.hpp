#pragma once

#include <vector>

#include <Eigen/Core>

#include "laserplan/execution.hpp"
#include "laserplan/grid.hpp"
#include "laserplan/kernels.hpp"

namespace laserplan {

/// Super-Gaussian crater parameters: depth = -A max(0, E exp[-(r^2/2 sigma^2)^P] - phi).
struct LaserParams {
  double A = 0.334;      // mm/J
  double sigma = 0.473;  // mm
  double P = 12.73;
  double phi = 1.939;    // J

  /// Throws InvalidArgument unless finite, A, sigma > 0, P >= 1, phi >= 0.
  void validate() const;
};

struct EnergyEntry {
  double duty = 0.0;         // percent
  double mean_energy = 0.0;  // J
  double std_energy = 0.0;   // J
};

/// Measured duty-cycle -> delivered energy table, interpolated piecewise linearly.
class EnergyTable {
 public:
  EnergyTable() : EnergyTable(measured()) {}
  explicit EnergyTable(std::vector<EnergyEntry> entries);

  /// The bench-measured table (1.5 s dwell, 20..100 % duty).
  static std::vector<EnergyEntry> measured();

  const std::vector<EnergyEntry>& entries() const { return entries_; }
  double min_duty() const { return entries_.front().duty; }
  double max_duty() const { return entries_.back().duty; }

 private:
  std::vector<EnergyEntry> entries_;
};

/// Throws OutOfRange outside [min_duty, max_duty].
double energy_for_duty(const EnergyTable& table, double duty);

/// One dwell of the laser: incident point (mm), incident angles (deg), duty (%).
struct CutInput {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Vector2d theta_deg = Eigen::Vector2d::Zero();
  double duty = 50.0;
  double dwell_s = 1.5;

  bool operator==(const CutInput&) const = default;
};

/// How a tilted beam maps onto the surface.
enum class TiltModel {
  /// r measured orthogonal to the beam axis (elliptical footprint), energy
  /// scaled by cos(total tilt).
  BeamAligned,
  /// r measured in the xy-plane, energy unchanged.
  NormalProjection,
};

struct CutOptions {
  TiltModel tilt_model = TiltModel::BeamAligned;
  double tilt_limit_deg = 10.0;
  ExecutionPolicy policy = ExecutionPolicy::Sequential;
};

/// Depth (mm, <= 0) at radius r for delivered energy E.
double crater_depth(const LaserParams& params, double energy, double r);

/// Radius beyond which the crater depth is exactly zero: 0 if E <= phi,
/// +inf if phi == 0.
double cutting_radius(const LaserParams& params, double energy);

/// Unit beam axis (pointing back toward the laser) for incident angles in degrees.
Eigen::Vector3d beam_axis(const Eigen::Vector2d& theta_deg);

/// Resolves a cut into a kernel stamp on `grid` for the given delivered
/// energy (before any oblique-incidence scaling). The box may be empty.
kernels::CraterStamp make_stamp(const GridSpec& grid, const CutInput& cut, const LaserParams& params, double energy,
                                TiltModel model);

/// Checks tilt limit and that mu sits on a valid node of `surface`.
/// Throws InvalidArgument (tilt) or OutsideWorkspace.
void validate_cut(const HeightField& surface, const CutInput& cut, double tilt_limit_deg);

/// Carves the crater for an explicit delivered energy (used by the plant).
HeightField apply_crater(const HeightField& surface, const CutInput& cut, const LaserParams& params, double energy,
                         const CutOptions& options = {});

/// Carves the crater for cut.duty via the energy table.
HeightField apply_cut(const HeightField& surface, const CutInput& cut, const LaserParams& params,
                      const EnergyTable& table, const CutOptions& options = {});

}  // namespace laserplan
