#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace laserplan {

/// Proper rigid motion p -> R p + t (mm).
class RigidTransform {
 public:
  RigidTransform() = default;
  /// Throws InvalidArgument if rotation is not orthonormal with det +1
  /// (tolerance 1e-9).
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle_rad,
                                        const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());
  /// Builds from a 4x4 homogeneous matrix, re-orthonormalizing the rotation block.
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);
  /// Projects an arbitrary 3x3 onto SO(3) via SVD.
  static Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;

  RigidTransform inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

  /// Rotation angle of this transform in radians, in [0, pi].
  double angle() const;

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// a * b: apply b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) { return compose(a, b); }

bool is_valid_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

}  // namespace laserplan
