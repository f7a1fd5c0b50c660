#pragma once

// Data-parallel heightfield loops. Every kernel has a serial reference in
// `serial` and an OpenMP twin in `omp`; tests hold them to agreement and the
// bench target times them against each other.

#include <cstddef>

#include "laserplan/grid.hpp"

namespace laserplan::kernels {

/// Inclusive node-index box.
struct IndexBox {
  int i0 = 0, j0 = 0, i1 = -1, j1 = -1;

  bool empty() const { return i1 < i0 || j1 < j0; }
  std::size_t count() const { return empty() ? 0 : static_cast<std::size_t>(i1 - i0 + 1) * (j1 - j0 + 1); }
  static IndexBox whole(const GridSpec& g) { return {0, 0, g.nx - 1, g.ny - 1}; }
};

/// Everything needed to carve one crater: depth(r) = -amplitude *
/// max(0, energy * exp(-(r^2 / (2 sigma^2))^sharpness) - threshold), with r the
/// distance from the beam axis through `center`. `axis_xy` holds the
/// horizontal components of the unit beam axis (zero at normal incidence).
struct CraterStamp {
  double cx = 0.0, cy = 0.0;
  double axis_x = 0.0, axis_y = 0.0;
  double energy = 0.0;
  double amplitude = 0.0, sigma = 1.0, sharpness = 1.0, threshold = 0.0;
  IndexBox box;
};

/// Signed-error weights: e > 0 (material above target) is scaled by
/// `under`, e < 0 by `over`.
struct ErrorWeights {
  double under = 1.0;
  double over = 1.0;
};

struct ErrorSums {
  double sum_sq = 0.0;  // sum of weighted e^2
  std::size_t count = 0;
};

namespace serial {
/// Adds the crater depth to every valid node in the stamp box.
void stamp_crater(HeightField& surface, const CraterStamp& stamp);
ErrorSums weighted_error(const HeightField& surface, const HeightField& target, ErrorWeights w, const IndexBox& box);
/// sum max(0, surface - target) over valid nodes, not yet multiplied by cell area.
double residual_sum(const HeightField& surface, const HeightField& target);
/// 3x3 median over valid neighbours; invalid nodes stay invalid.
HeightField median3x3(const HeightField& in);
}  // namespace serial

namespace omp {
void stamp_crater(HeightField& surface, const CraterStamp& stamp);
ErrorSums weighted_error(const HeightField& surface, const HeightField& target, ErrorWeights w, const IndexBox& box);
double residual_sum(const HeightField& surface, const HeightField& target);
HeightField median3x3(const HeightField& in);
}  // namespace omp

}  // namespace laserplan::kernels
