#include "laserplan/constraint.hpp"

namespace laserplan {

ConstraintCheck check_constraint(const HeightField& surface, const ConstraintField& constraint) {
  surface.require_same_grid(constraint.ceiling, "constraint");
  ConstraintCheck out;
  for (std::size_t k = 0; k < surface.size(); ++k) {
    if (constraint.active(k) && surface.valid_at(k) && surface.at(k) < constraint.ceiling.at(k)) {
      out.violated.push_back(k);
    }
  }
  return out;
}

bool violates(const HeightField& surface, const ConstraintField& constraint, const kernels::IndexBox& box) {
  const GridSpec& g = surface.grid();
  for (int j = box.j0; j <= box.j1; ++j) {
    for (int i = box.i0; i <= box.i1; ++i) {
      const std::size_t k = g.index(i, j);
      if (constraint.active(k) && surface.valid_at(k) && surface.at(k) < constraint.ceiling.at(k)) return true;
    }
  }
  return false;
}

}  // namespace laserplan
