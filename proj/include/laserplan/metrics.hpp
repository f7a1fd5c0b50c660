#pragma once

#include <optional>
#include <span>
#include <vector>

#include "laserplan/execution.hpp"
#include "laserplan/grid.hpp"

namespace laserplan {

/// Resection accuracy against a target, with e_i = achieved_i - target_i
/// (positive = material left above the target = undercut).
struct MetricReport {
  double rmse = 0.0;          // mm
  double mae = 0.0;           // mm
  double pct_overcut = 0.0;   // percent of the objective
  double pct_undercut = 0.0;  // percent of the objective
  double iou = 1.0;           // removed-volume intersection over union, [0, 1]
};

/// Evaluated over nodes valid in all three fields. Percentages are 0 and IoU
/// is 1 when there is nothing to remove and nothing was removed.
/// Throws GridMismatch, or InvalidTarget if any target node lies above initial.
MetricReport compute_metrics(const HeightField& achieved, const HeightField& target, const HeightField& initial);

/// sum max(0, surface - target) * cell area (mm^3).
double residual_volume(const HeightField& surface, const HeightField& target,
                       ExecutionPolicy policy = ExecutionPolicy::Sequential);

/// Volume between initial and target surfaces (mm^3).
inline double objective_volume(const HeightField& initial, const HeightField& target) {
  return residual_volume(initial, target);
}

struct Histogram {
  std::vector<double> edges;          // bins + 1 ascending edges
  std::vector<std::size_t> counts;    // per bin; the last bin is closed on the right
  std::size_t total() const;
};

/// Equal-width histogram. When lo == hi the range widens to +-0.5 around it.
Histogram make_histogram(std::span<const double> values, int bins, std::optional<std::pair<double, double>> range = {});

/// achieved - target at every node valid in both.
std::vector<double> signed_errors(const HeightField& achieved, const HeightField& target);

}  // namespace laserplan
