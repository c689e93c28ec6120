#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace affordfit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Points in meters with an optional per-point part label. When `labels` is
/// non-empty it has one entry per point, indexing the owning object's part list.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool labeled() const { return !labels.empty(); }

  /// Points carrying `label`, in cloud order.
  std::vector<Vec3> select(int label) const;
};

/// Throws EmptyCloud / SchemaError when coordinates are non-finite or the label
/// array does not match the point count.
void check_cloud(const PointCloud& cloud);

Vec3 centroid(const std::vector<Vec3>& points);

}  // namespace affordfit
