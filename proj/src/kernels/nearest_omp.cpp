#include "affordfit/kernels/nearest.hpp"

#include <cmath>

namespace affordfit::kernels::detail {

template <int Dim>
void nearest_indexed_omp(const KdTree<Dim>& tree, const std::vector<Point<Dim>>& queries, Nearest& out) {
  const long n = static_cast<long>(queries.size());
#pragma omp parallel for schedule(static)
  for (long q = 0; q < n; ++q) {
    const auto hit = tree.nearest(queries[q]);
    out.index[q] = hit.index;
    out.distance[q] = std::sqrt(hit.squared_distance);
  }
}

template void nearest_indexed_omp<2>(const KdTree<2>&, const std::vector<Point<2>>&, Nearest&);
template void nearest_indexed_omp<3>(const KdTree<3>&, const std::vector<Point<3>>&, Nearest&);

}  // namespace affordfit::kernels::detail
