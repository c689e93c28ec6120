#include "affordfit/geom/camera.hpp"

#include "affordfit/error.hpp"

#include <cmath>
#include <string>

namespace affordfit {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::SchemaError, "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::SchemaError, "image size must be positive");
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height)) {
    throw Error(ErrorCode::SchemaError, "principal point lies outside the image");
  }
}

Vec2 project_point(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z() > kMinDepth)) {
    throw Error(ErrorCode::NonPositiveDepth, "point depth " + std::to_string(p.z()) + " is not positive");
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

std::vector<Vec2> project_points(const std::vector<Vec3>& points, const CameraIntrinsics& k) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project_point(p, k));
  return out;
}

std::vector<Vec2> project_points(const PointCloud& cloud, const CameraIntrinsics& k) {
  return project_points(cloud.points, k);
}

Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& k) {
  return {(pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth, depth};
}

}  // namespace affordfit
