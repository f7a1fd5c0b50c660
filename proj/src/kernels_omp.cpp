#include "kernels_detail.hpp"

#include <omp.h>

#include "laserplan/execution.hpp"

namespace laserplan {

int max_threads() { return omp_get_max_threads(); }

}  // namespace laserplan

namespace laserplan::kernels::omp {

void stamp_crater(HeightField& surface, const CraterStamp& stamp) {
  const GridSpec& g = surface.grid();
  const int j0 = stamp.box.j0, j1 = stamp.box.j1;
#pragma omp parallel for schedule(static)
  for (int j = j0; j <= j1; ++j) {
    const double y = g.y(j);
    for (int i = stamp.box.i0; i <= stamp.box.i1; ++i) {
      const std::size_t k = g.index(i, j);
      if (!surface.valid_at(k)) continue;
      surface.at(k) += detail::crater_delta(stamp, g.x(i), y);
    }
  }
}

ErrorSums weighted_error(const HeightField& surface, const HeightField& target, ErrorWeights w, const IndexBox& box) {
  const GridSpec& g = surface.grid();
  double sum_sq = 0.0;
  std::size_t count = 0;
#pragma omp parallel for reduction(+ : sum_sq, count) schedule(static)
  for (int j = box.j0; j <= box.j1; ++j) {
    for (int i = box.i0; i <= box.i1; ++i) {
      const std::size_t k = g.index(i, j);
      if (!surface.valid_at(k) || !target.valid_at(k)) continue;
      sum_sq += detail::weighted_term(surface.at(k) - target.at(k), w);
      ++count;
    }
  }
  return {sum_sq, count};
}

double residual_sum(const HeightField& surface, const HeightField& target) {
  const auto n = static_cast<long>(surface.size());
  double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
  for (long k = 0; k < n; ++k) {
    if (!surface.valid_at(k) || !target.valid_at(k)) continue;
    sum += std::max(0.0, surface.at(k) - target.at(k));
  }
  return sum;
}

HeightField median3x3(const HeightField& in) {
  const GridSpec& g = in.grid();
  HeightField out = in;
#pragma omp parallel
  {
    std::vector<double> buf;
    buf.reserve(9);
#pragma omp for schedule(static)
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(i, j);
        if (!in.valid_at(k)) continue;
        detail::gather_window(in, i, j, buf);
        out.at(k) = detail::median_of(buf);
      }
    }
  }
  return out;
}

}  // namespace laserplan::kernels::omp
