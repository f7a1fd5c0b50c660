#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "laserplan/kernels.hpp"

namespace laserplan::kernels::detail {

// Shared per-node arithmetic so the serial and OpenMP kernels agree bitwise.
inline double crater_delta(const CraterStamp& s, double x, double y) {
  const double dx = x - s.cx;
  const double dy = y - s.cy;
  const double along = s.axis_x * dx + s.axis_y * dy;
  const double r2 = std::max(0.0, dx * dx + dy * dy - along * along);
  const double u = r2 / (2.0 * s.sigma * s.sigma);
  const double up = u > 0.0 ? std::pow(u, s.sharpness) : 0.0;
  const double inner = s.energy * std::exp(-up) - s.threshold;
  return inner > 0.0 ? -s.amplitude * inner : 0.0;
}

inline double weighted_term(double e, ErrorWeights w) {
  const double v = e > 0.0 ? w.under * e : w.over * e;
  return v * v;
}

inline double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

inline void gather_window(const HeightField& in, int i, int j, std::vector<double>& buf) {
  const GridSpec& g = in.grid();
  buf.clear();
  for (int dj = -1; dj <= 1; ++dj) {
    const int jj = j + dj;
    if (jj < 0 || jj >= g.ny) continue;
    for (int di = -1; di <= 1; ++di) {
      const int ii = i + di;
      if (ii < 0 || ii >= g.nx) continue;
      const std::size_t k = g.index(ii, jj);
      if (in.valid_at(k)) buf.push_back(in.at(k));
    }
  }
}

}  // namespace laserplan::kernels::detail
