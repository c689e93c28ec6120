#include "affordfit/types.hpp"

#include "affordfit/error.hpp"

#include <string>

namespace affordfit {

std::vector<Vec3> PointCloud::select(int label) const {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < points.size() && i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(points[i]);
  }
  return out;
}

void check_cloud(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "point cloud is empty");
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!cloud.points[i].allFinite()) {
      throw Error(ErrorCode::SchemaError, "non-finite coordinate at point " + std::to_string(i));
    }
  }
  if (cloud.labeled() && cloud.labels.size() != cloud.points.size()) {
    throw Error(ErrorCode::SchemaError, "label count does not match point count");
  }
}

Vec3 centroid(const std::vector<Vec3>& points) {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

}  // namespace affordfit
