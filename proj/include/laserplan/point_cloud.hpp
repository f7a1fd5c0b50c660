#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace laserplan {

struct PointCloud3 {
  std::vector<Eigen::Vector3d> points;
  std::optional<std::vector<int>> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws InvalidArgument on non-finite coordinates or a label list that
  /// does not cover every point.
  void validate() const;
};

}  // namespace laserplan
