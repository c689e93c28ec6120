#include "affordfit/geom/rotation.hpp"

#include "affordfit/error.hpp"

#include <algorithm>
#include <numbers>

namespace affordfit {

bool is_rotation(const Mat3& r, double tolerance) {
  if (!r.allFinite()) return false;
  const double orth = (r.transpose() * r - Mat3::Identity()).norm();
  return orth <= tolerance && r.determinant() > 0.0;
}

double geodesic_distance(const Mat3& r1, const Mat3& r2) {
  const double c = ((r1.transpose() * r2).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Mat3 slerp_midpoint(const Mat3& r1, const Mat3& r2) {
  Eigen::Quaterniond q1(r1);
  Eigen::Quaterniond q2(r2);
  q1.normalize();
  q2.normalize();
  const double dot = q1.coeffs().dot(q2.coeffs());
  // The unit-quaternion chord midpoint is the slerp midpoint once both lie in
  // the same hemisphere; dot == 0 means the rotations are pi apart.
  if (std::abs(dot) < 1e-12) {
    throw Error(ErrorCode::AntipodalRotations, "rotations are pi apart; midpoint is not unique");
  }
  const Eigen::Vector4d sum = q1.coeffs() + (dot < 0.0 ? -1.0 : 1.0) * q2.coeffs();
  Eigen::Quaterniond mid;
  mid.coeffs() = sum.normalized();
  return mid.toRotationMatrix();
}

std::vector<Vec3> apply_pose(const RigidPose& pose, const std::vector<Vec3>& points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(pose * p);
  return out;
}

PointCloud apply_pose(const RigidPose& pose, const PointCloud& cloud) {
  return {apply_pose(pose, cloud.points), cloud.labels};
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Rotation6d encode_rotation_6d(const Mat3& r) {
  Rotation6d a;
  a << r.col(0), r.col(1);
  return a;
}

}  // namespace affordfit
