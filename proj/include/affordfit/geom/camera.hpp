#pragma once

#include "affordfit/types.hpp"

#include <vector>

namespace affordfit {

/// Pinhole intrinsics in pixels. The world frame is the camera frame of the
/// observation sequence, so there is no extrinsics type.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
  bool contains(const Vec2& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() < width && pixel.y() < height;
  }
};

inline constexpr double kMinDepth = 1e-9;

/// (fx x / z + cx, fy y / z + cy), unrounded. Throws NonPositiveDepth when z <= kMinDepth.
Vec2 project_point(const Vec3& p, const CameraIntrinsics& k);
std::vector<Vec2> project_points(const std::vector<Vec3>& points, const CameraIntrinsics& k);
std::vector<Vec2> project_points(const PointCloud& cloud, const CameraIntrinsics& k);

Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& k);

}  // namespace affordfit
