#include "laserplan/calibration.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "laserplan/error.hpp"
#include "laserplan/fitting.hpp"

namespace laserplan {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

// 2 sin(theta / 2) * axis.
Eigen::Vector3d modified_rodrigues(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return 2.0 * std::sin(aa.angle() / 2.0) * aa.axis();
}

}  // namespace

std::vector<PosePair> relative_pairs(std::span<const PoseObservation> stations) {
  std::vector<PosePair> out;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    for (std::size_t j = i + 1; j < stations.size(); ++j) {
      out.push_back({stations[j].world_ee.inverse() * stations[i].world_ee,
                     stations[j].sensor_marker * stations[i].sensor_marker.inverse()});
    }
  }
  return out;
}

RigidTransform solve_hand_eye(std::span<const PosePair> pairs) {
  constexpr double kMinAngle = 1e-6;
  std::vector<Eigen::Vector3d> axes;
  for (const auto& p : pairs) {
    const Eigen::AngleAxisd aa(p.A.rotation());
    if (aa.angle() > kMinAngle) axes.push_back(aa.axis());
  }
  if (axes.size() < 2) throw Error(ErrorCode::InsufficientMotion, "need at least two rotating motions");
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(axes.size()), 3);
  for (std::size_t k = 0; k < axes.size(); ++k) stacked.row(static_cast<Eigen::Index>(k)) = axes[k].transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  if (svd.singularValues()(1) < 1e-6 * svd.singularValues()(0)) {
    throw Error(ErrorCode::InsufficientMotion, "rotation axes are parallel");
  }

  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd m(3 * n, 3);
  Eigen::VectorXd rhs(3 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Vector3d pa = modified_rodrigues(pairs[k].A.rotation());
    const Eigen::Vector3d pb = modified_rodrigues(pairs[k].B.rotation());
    m.block<3, 3>(3 * k, 0) = skew(pa + pb);
    rhs.segment<3>(3 * k) = pb - pa;
  }
  const Eigen::Vector3d pp = m.colPivHouseholderQr().solve(rhs);
  const Eigen::Vector3d px = 2.0 * pp / std::sqrt(1.0 + pp.squaredNorm());
  const double px2 = px.squaredNorm();
  const Eigen::Matrix3d rx = (1.0 - px2 / 2.0) * Eigen::Matrix3d::Identity() +
                             0.5 * (px * px.transpose() + std::sqrt(4.0 - px2) * skew(px));

  const Eigen::Matrix3d rot = RigidTransform::nearest_rotation(rx);
  for (Eigen::Index k = 0; k < n; ++k) {
    m.block<3, 3>(3 * k, 0) = pairs[k].A.rotation() - Eigen::Matrix3d::Identity();
    rhs.segment<3>(3 * k) = rot * pairs[k].B.translation() - pairs[k].A.translation();
  }
  const Eigen::Vector3d t = m.colPivHouseholderQr().solve(rhs);
  return {rot, t};
}

RigidTransform marker_frame_from_dots(const Eigen::Vector3d& dot1, const Eigen::Vector3d& dot2,
                                      const Eigen::Vector3d& plane_normal) {
  if (!dot1.allFinite() || !dot2.allFinite() || !plane_normal.allFinite()) {
    throw Error(ErrorCode::DegenerateInput, "non-finite marker input");
  }
  const double nn = plane_normal.norm();
  if (!(nn > 0.0)) throw Error(ErrorCode::DegenerateInput, "zero plane normal");
  const Eigen::Vector3d z = plane_normal / nn;
  const Eigen::Vector3d v = dot2 - dot1;
  if (!(v.norm() > 0.0)) throw Error(ErrorCode::DegenerateInput, "marker dots coincide");
  const Eigen::Vector3d in_plane = v - v.dot(z) * z;
  if (in_plane.norm() <= 1e-12 * v.norm()) throw Error(ErrorCode::DegenerateInput, "dot vector is along the normal");
  const Eigen::Vector3d x = in_plane.normalized();
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  return {r, dot1};
}

LaserAxis fit_laser_axis(std::span<const CraterCenter> centers, double focal_distance) {
  if (centers.size() < 2) throw Error(ErrorCode::DegenerateInput, "laser axis needs at least two craters");
  bool distinct = false;
  for (const auto& c : centers) distinct = distinct || c.z != centers.front().z;
  if (!distinct) throw Error(ErrorCode::DegenerateInput, "all craters were cut at the same height");
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(centers.size());
  for (const auto& c : centers) pts.emplace_back(c.c.x(), c.c.y(), c.z);
  const Line3 line = fit_line(pts);
  if (!(line.direction.z() > 0.0)) throw Error(ErrorCode::DegenerateInput, "laser axis lies in the xy-plane");
  LaserAxis axis;
  axis.direction = line.direction;
  axis.focal_distance = focal_distance;
  axis.focal_point = line.point + line.direction * ((focal_distance - line.point.z()) / line.direction.z());
  return axis;
}

std::vector<double> reprojection_errors(const RigidTransform& X, std::span<const PoseObservation> stations,
                                        std::span<const Eigen::Vector3d> reference_points) {
  std::vector<double> out;
  if (stations.empty()) return out;
  std::vector<RigidTransform> chain;
  chain.reserve(stations.size());
  for (const auto& s : stations) chain.push_back(s.world_ee * X * s.sensor_marker);
  std::vector<Eigen::Vector3d> mean(reference_points.size(), Eigen::Vector3d::Zero());
  for (const auto& c : chain) {
    for (std::size_t p = 0; p < reference_points.size(); ++p) mean[p] += c.apply(reference_points[p]);
  }
  for (auto& m : mean) m /= static_cast<double>(chain.size());
  for (const auto& c : chain) {
    for (std::size_t p = 0; p < reference_points.size(); ++p) {
      out.push_back((c.apply(reference_points[p]) - mean[p]).norm());
    }
  }
  return out;
}

}  // namespace laserplan
