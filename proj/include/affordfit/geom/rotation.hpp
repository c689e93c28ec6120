#pragma once

#include "affordfit/types.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <vector>

namespace affordfit {

/// x -> R x + t. `rotation` is expected to be orthonormal with det = +1.
struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidPose identity() { return {}; }

  Vec3 operator*(const Vec3& x) const { return rotation * x + translation; }
  RigidPose operator*(const RigidPose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  RigidPose inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -rt * translation};
  }
};

using PoseTrajectory = std::vector<RigidPose>;

bool is_rotation(const Mat3& r, double tolerance = 1e-6);

/// Angle of r1^T r2 in radians, in [0, pi].
double geodesic_distance(const Mat3& r1, const Mat3& r2);

/// Rotation halfway along the shortest geodesic between r1 and r2.
/// Throws AntipodalRotations when the two are pi apart.
Mat3 slerp_midpoint(const Mat3& r1, const Mat3& r2);

PointCloud apply_pose(const RigidPose& pose, const PointCloud& cloud);
std::vector<Vec3> apply_pose(const RigidPose& pose, const std::vector<Vec3>& points);

Mat3 axis_angle(const Vec3& axis, double angle);

/// Continuous 6D rotation encoding: the first two columns of R.
using Rotation6d = Eigen::Matrix<double, 6, 1>;

Rotation6d encode_rotation_6d(const Mat3& r);

/// Gram-Schmidt decoding of a 6D encoding; always yields a proper rotation for
/// non-degenerate input (both halves non-zero and not parallel).
template <typename T>
Eigen::Matrix<T, 3, 3> decode_rotation_6d(const T* a) {
  using std::sqrt;
  using V = Eigen::Matrix<T, 3, 1>;
  const V a1(a[0], a[1], a[2]);
  const V a2(a[3], a[4], a[5]);
  const V b1 = a1 / sqrt(a1.squaredNorm());
  const V u2 = a2 - b1.dot(a2) * b1;
  const V b2 = u2 / sqrt(u2.squaredNorm());
  const V b3 = b1.cross(b2);
  Eigen::Matrix<T, 3, 3> r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b3;
  return r;
}

inline Mat3 decode_rotation_6d(const Rotation6d& a) { return decode_rotation_6d<double>(a.data()); }

}  // namespace affordfit
