#include "affordfit/geom/distance.hpp"

#include "affordfit/error.hpp"

namespace affordfit {

namespace {
void require_points(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyCloud, "distance between empty clouds");
}
}  // namespace

double chamfer_distance(const PointCloud& a, const PointCloud& b, kernels::Exec exec) {
  require_points(a, b);
  return kernels::chamfer_indexed<3>(a.points, b.points, exec);
}

double min_pair_distance(const PointCloud& a, const PointCloud& b, kernels::Exec exec) {
  require_points(a, b);
  return kernels::min_pair_indexed(a.points, b.points, exec).distance;
}

}  // namespace affordfit
