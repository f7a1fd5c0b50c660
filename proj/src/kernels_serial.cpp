#include "kernels_detail.hpp"

namespace laserplan::kernels::serial {

void stamp_crater(HeightField& surface, const CraterStamp& stamp) {
  const GridSpec& g = surface.grid();
  for (int j = stamp.box.j0; j <= stamp.box.j1; ++j) {
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
  ErrorSums out;
  for (int j = box.j0; j <= box.j1; ++j) {
    for (int i = box.i0; i <= box.i1; ++i) {
      const std::size_t k = g.index(i, j);
      if (!surface.valid_at(k) || !target.valid_at(k)) continue;
      out.sum_sq += detail::weighted_term(surface.at(k) - target.at(k), w);
      ++out.count;
    }
  }
  return out;
}

double residual_sum(const HeightField& surface, const HeightField& target) {
  double sum = 0.0;
  for (std::size_t k = 0; k < surface.size(); ++k) {
    if (!surface.valid_at(k) || !target.valid_at(k)) continue;
    sum += std::max(0.0, surface.at(k) - target.at(k));
  }
  return sum;
}

HeightField median3x3(const HeightField& in) {
  const GridSpec& g = in.grid();
  HeightField out = in;
  std::vector<double> buf;
  buf.reserve(9);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!in.valid_at(k)) continue;
      detail::gather_window(in, i, j, buf);
      out.at(k) = detail::median_of(buf);
    }
  }
  return out;
}

}  // namespace laserplan::kernels::serial
