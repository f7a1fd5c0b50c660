#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "laserplan/error.hpp"

namespace laserplan {

/// Axis-aligned regular grid of sample nodes. Node (i, j) sits at
/// origin + (i * spacing.x, j * spacing.y); storage is row-major in j.
struct GridSpec {
  Eigen::Vector2d origin{0.0, 0.0};
  Eigen::Vector2d spacing{0.05, 0.05};
  int nx = 2;
  int ny = 2;

  /// Throws InvalidArgument unless spacing > 0 and nx, ny >= 2.
  void validate() const;

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double x(int i) const { return origin.x() + i * spacing.x(); }
  double y(int j) const { return origin.y() + j * spacing.y(); }
  Eigen::Vector2d node(int i, int j) const { return {x(i), y(j)}; }
  double cell_area() const { return spacing.x() * spacing.y(); }
  Eigen::Vector2d extent_max() const { return {x(nx - 1), y(ny - 1)}; }

  /// Nearest node to a metric point, or nullopt when the point lies more than
  /// half a cell outside the grid.
  std::optional<std::pair<int, int>> nearest(const Eigen::Vector2d& p) const;

  /// Builds a grid covering [lo, lo + size] at the given spacing.
  static GridSpec covering(const Eigen::Vector2d& lo, const Eigen::Vector2d& size, double spacing);

  bool operator==(const GridSpec& other) const;
};

/// Single-valued tissue surface z(x, y) with a per-node validity mask.
class HeightField {
 public:
  HeightField() = default;
  explicit HeightField(const GridSpec& grid, double fill = 0.0);

  /// All nodes invalid, heights NaN.
  static HeightField empty(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return z_.size(); }

  double operator()(int i, int j) const { return z_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return z_[grid_.index(i, j)]; }
  double at(std::size_t k) const { return z_[k]; }
  double& at(std::size_t k) { return z_[k]; }

  bool valid(int i, int j) const { return valid_[grid_.index(i, j)] != 0; }
  bool valid_at(std::size_t k) const { return valid_[k] != 0; }
  void set_valid(std::size_t k, bool v) { valid_[k] = v ? 1 : 0; }
  void set(std::size_t k, double value) {
    z_[k] = value;
    valid_[k] = 1;
  }
  void invalidate(std::size_t k);

  std::span<const double> heights() const { return z_; }
  std::span<double> heights() { return z_; }
  std::span<const std::uint8_t> mask() const { return valid_; }

  std::size_t valid_count() const;
  bool all_valid() const;

  /// Throws GridMismatch if the other field is on a different grid.
  void require_same_grid(const HeightField& other, const char* what) const;

  /// FNV-1a over grid geometry, mask and height bits.
  std::uint64_t hash() const;

 private:
  GridSpec grid_{};
  std::vector<double> z_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace laserplan
