#include "laserplan/grid.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace laserplan {

void GridSpec::validate() const {
  if (!(spacing.x() > 0.0) || !(spacing.y() > 0.0) || !std::isfinite(spacing.x()) ||
      !std::isfinite(spacing.y())) {
    throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive and finite");
  }
  if (nx < 2 || ny < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2x2 nodes");
  if (!origin.allFinite()) throw Error(ErrorCode::InvalidArgument, "grid origin must be finite");
}

std::optional<std::pair<int, int>> GridSpec::nearest(const Eigen::Vector2d& p) const {
  const double fi = (p.x() - origin.x()) / spacing.x();
  const double fj = (p.y() - origin.y()) / spacing.y();
  const long i = std::lround(fi);
  const long j = std::lround(fj);
  if (i < 0 || j < 0 || i >= nx || j >= ny) return std::nullopt;
  return std::make_pair(static_cast<int>(i), static_cast<int>(j));
}

GridSpec GridSpec::covering(const Eigen::Vector2d& lo, const Eigen::Vector2d& size, double spacing) {
  GridSpec g;
  g.origin = lo;
  g.spacing = {spacing, spacing};
  // Round so that a 10 mm span at 0.05 mm gives exactly 201 nodes.
  g.nx = static_cast<int>(std::lround(size.x() / spacing)) + 1;
  g.ny = static_cast<int>(std::lround(size.y() / spacing)) + 1;
  g.validate();
  return g;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return nx == other.nx && ny == other.ny && origin == other.origin && spacing == other.spacing;
}

HeightField::HeightField(const GridSpec& grid, double fill)
    : grid_(grid), z_(grid.size(), fill), valid_(grid.size(), 1) {
  grid_.validate();
}

HeightField HeightField::empty(const GridSpec& grid) {
  HeightField h(grid, std::numeric_limits<double>::quiet_NaN());
  std::fill(h.valid_.begin(), h.valid_.end(), 0);
  return h;
}

void HeightField::invalidate(std::size_t k) {
  z_[k] = std::numeric_limits<double>::quiet_NaN();
  valid_[k] = 0;
}

std::size_t HeightField::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid_) n += v;
  return n;
}

bool HeightField::all_valid() const { return valid_count() == valid_.size(); }

void HeightField::require_same_grid(const HeightField& other, const char* what) const {
  if (!(grid_ == other.grid_)) {
    throw Error(ErrorCode::GridMismatch, std::string(what) + ": heightfields are on different grids");
  }
}

namespace {
constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= kFnvPrime;
  }
}
}  // namespace

std::uint64_t HeightField::hash() const {
  std::uint64_t h = kFnvOffset;
  fnv_bytes(h, &grid_.nx, sizeof grid_.nx);
  fnv_bytes(h, &grid_.ny, sizeof grid_.ny);
  fnv_bytes(h, grid_.origin.data(), 2 * sizeof(double));
  fnv_bytes(h, grid_.spacing.data(), 2 * sizeof(double));
  for (std::size_t k = 0; k < z_.size(); ++k) {
    fnv_bytes(h, &valid_[k], 1);
    if (valid_[k]) fnv_bytes(h, &z_[k], sizeof(double));
  }
  return h;
}

}  // namespace laserplan
