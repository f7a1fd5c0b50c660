#pragma once

#include <cstddef>
#include <vector>

#include "laserplan/grid.hpp"
#include "laserplan/kernels.hpp"

namespace laserplan {

/// Lowest permissible surface height per node. A node is active where the
/// ceiling is valid; elsewhere the surface may go arbitrarily deep.
struct ConstraintField {
  HeightField ceiling;

  static ConstraintField none(const GridSpec& grid) { return {HeightField::empty(grid)}; }
  bool active(std::size_t k) const { return ceiling.valid_at(k); }
  std::size_t active_count() const { return ceiling.valid_count(); }
};

struct ConstraintCheck {
  std::vector<std::size_t> violated;  // node indices below the ceiling

  bool ok() const { return violated.empty(); }
};

/// Violated iff some active node lies strictly below its ceiling.
ConstraintCheck check_constraint(const HeightField& surface, const ConstraintField& constraint);

/// Same test restricted to a node box; stops at the first violation.
bool violates(const HeightField& surface, const ConstraintField& constraint, const kernels::IndexBox& box);

}  // namespace laserplan
