#include "laserplan/rigid_transform.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "laserplan/error.hpp"

namespace laserplan {

bool is_valid_rotation(const Eigen::Matrix3d& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_valid_rotation(rotation_)) throw Error(ErrorCode::InvalidArgument, "rotation is not in SO(3)");
  if (!translation_.allFinite()) throw Error(ErrorCode::InvalidArgument, "translation is not finite");
}

RigidTransform RigidTransform::from_axis_angle(const Eigen::Vector3d& axis, double angle_rad,
                                               const Eigen::Vector3d& translation) {
  const double n = axis.norm();
  if (!(n > 0.0)) {
    if (angle_rad == 0.0) return RigidTransform(Eigen::Matrix3d::Identity(), translation);
    throw Error(ErrorCode::InvalidArgument, "rotation axis must be nonzero");
  }
  const Eigen::Matrix3d r = Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix();
  return RigidTransform(r, translation);
}

Eigen::Matrix3d RigidTransform::nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  return RigidTransform(nearest_rotation(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>());
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

double RigidTransform::angle() const {
  const double c = std::clamp((rotation_.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  const Eigen::Matrix3d r = a.rotation() * b.rotation();
  const Eigen::Vector3d t = a.rotation() * b.translation() + a.translation();
  // Long chains can drift past the 1e-9 orthonormality tolerance.
  return RigidTransform(is_valid_rotation(r) ? r : RigidTransform::nearest_rotation(r), t);
}

}  // namespace laserplan
