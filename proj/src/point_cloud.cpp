#include "laserplan/point_cloud.hpp"

#include "laserplan/error.hpp"

namespace laserplan {

void PointCloud3::validate() const {
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "point cloud has non-finite coordinates");
  }
  if (labels && labels->size() != points.size()) {
    throw Error(ErrorCode::InvalidArgument, "label count does not match point count");
  }
}

}  // namespace laserplan
