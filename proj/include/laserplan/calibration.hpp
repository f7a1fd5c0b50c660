#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "laserplan/rigid_transform.hpp"

namespace laserplan {

/// One relative motion: A of the end effector, B of the sensor-observed target.
struct PosePair {
  RigidTransform A;
  RigidTransform B;
};

/// Absolute poses at one robot station: end effector in the world, and the
/// calibration marker as seen by the sensor.
struct PoseObservation {
  RigidTransform world_ee;
  RigidTransform sensor_marker;
};

/// Relative motions between every pair of stations (i < j):
/// A = W_j^-1 W_i, B = S_j S_i^-1, so that A X = X B for the sensor-to-EE X.
std::vector<PosePair> relative_pairs(std::span<const PoseObservation> stations);

/// Solves A X = X B (Tsai-Lenz): rotation from modified Rodrigues vectors,
/// then translation by linear least squares.
/// Throws InsufficientMotion if the rotation axes do not span two dimensions.
RigidTransform solve_hand_eye(std::span<const PosePair> pairs);

/// Frame with origin at dot1, +X toward dot2 within the marker plane, +Z along
/// the plane normal. Throws DegenerateInput.
RigidTransform marker_frame_from_dots(const Eigen::Vector3d& dot1, const Eigen::Vector3d& dot2,
                                      const Eigen::Vector3d& plane_normal);

struct CraterCenter {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();  // mm, in the sensor frame
  double z = 0.0;                               // mm, sample height during ablation
};

struct LaserAxis {
  Eigen::Vector3d direction{0.0, 0.0, 1.0};  // unit, +z component
  Eigen::Vector3d focal_point = Eigen::Vector3d::Zero();
  double focal_distance = 0.0;
};

/// Total-least-squares line through (c_i, z_i); the focal point is where the
/// line crosses z = focal_distance. Throws DegenerateInput if every z_i is equal.
LaserAxis fit_laser_axis(std::span<const CraterCenter> centers, double focal_distance);

/// Maps each reference point (marker frame) into the world through every
/// station and reports its distance from the mean over stations; one entry per
/// (station, point), station-major.
std::vector<double> reprojection_errors(const RigidTransform& X, std::span<const PoseObservation> stations,
                                        std::span<const Eigen::Vector3d> reference_points);

}  // namespace laserplan
