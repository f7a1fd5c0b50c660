#include "laserplan/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "laserplan/error.hpp"
#include "laserplan/kernels.hpp"

namespace laserplan {

MetricReport compute_metrics(const HeightField& achieved, const HeightField& target, const HeightField& initial) {
  achieved.require_same_grid(target, "compute_metrics");
  achieved.require_same_grid(initial, "compute_metrics");
  constexpr double kSlack = 1e-12;
  double sum_sq = 0.0, sum_abs = 0.0, under = 0.0, over = 0.0, objective = 0.0, inter = 0.0, uni = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < achieved.size(); ++k) {
    if (!achieved.valid_at(k) || !target.valid_at(k) || !initial.valid_at(k)) continue;
    const double z = achieved.at(k), f = target.at(k), z0 = initial.at(k);
    if (f > z0 + kSlack) throw Error(ErrorCode::InvalidTarget, "target lies above the initial surface");
    const double e = z - f;
    sum_sq += e * e;
    sum_abs += std::abs(e);
    under += std::max(0.0, e);
    over += -std::min(0.0, e);
    objective += z0 - f;
    const double d_achieved = std::max(0.0, z0 - z);
    const double d_target = std::max(0.0, z0 - f);
    inter += std::min(d_achieved, d_target);
    uni += std::max(d_achieved, d_target);
    ++n;
  }
  MetricReport r;
  if (n == 0) throw Error(ErrorCode::MissingData, "no node is valid in all three heightfields");
  r.rmse = std::sqrt(sum_sq / static_cast<double>(n));
  r.mae = sum_abs / static_cast<double>(n);
  r.pct_undercut = objective > 0.0 ? 100.0 * under / objective : 0.0;
  r.pct_overcut = objective > 0.0 ? 100.0 * over / objective : 0.0;
  r.iou = uni > 0.0 ? inter / uni : 1.0;
  return r;
}

double residual_volume(const HeightField& surface, const HeightField& target, ExecutionPolicy policy) {
  surface.require_same_grid(target, "residual_volume");
  const double sum = policy == ExecutionPolicy::Parallel ? kernels::omp::residual_sum(surface, target)
                                                          : kernels::serial::residual_sum(surface, target);
  return sum * surface.grid().cell_area();
}

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

Histogram make_histogram(std::span<const double> values, int bins, std::optional<std::pair<double, double>> range) {
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  double lo = 0.0, hi = 0.0;
  if (range) {
    std::tie(lo, hi) = *range;
  } else if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * b / bins;
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (!(v >= lo && v <= hi)) continue;
    auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

std::vector<double> signed_errors(const HeightField& achieved, const HeightField& target) {
  achieved.require_same_grid(target, "signed_errors");
  std::vector<double> e;
  e.reserve(achieved.size());
  for (std::size_t k = 0; k < achieved.size(); ++k) {
    if (achieved.valid_at(k) && target.valid_at(k)) e.push_back(achieved.at(k) - target.at(k));
  }
  return e;
}

}  // namespace laserplan
