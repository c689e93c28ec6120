#include "affordfit/kernels/nearest.hpp"

#include <cmath>
#include <limits>

namespace affordfit::kernels {

template <int Dim>
Nearest nearest_brute(const std::vector<Point<Dim>>& reference, const std::vector<Point<Dim>>& queries) {
  Nearest out;
  out.index.assign(queries.size(), -1);
  out.distance.assign(queries.size(), std::numeric_limits<double>::infinity());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    int best_index = -1;
    for (std::size_t r = 0; r < reference.size(); ++r) {
      const double d2 = (reference[r] - queries[q]).squaredNorm();
      if (d2 < best) {
        best = d2;
        best_index = static_cast<int>(r);
      }
    }
    out.index[q] = best_index;
    out.distance[q] = std::sqrt(best);
  }
  return out;
}

template <int Dim>
Nearest nearest_indexed(const KdTree<Dim>& tree, const std::vector<Point<Dim>>& queries, Exec exec) {
  Nearest out;
  out.index.resize(queries.size());
  out.distance.resize(queries.size());
  if (exec == Exec::parallel) {
    detail::nearest_indexed_omp(tree, queries, out);
    return out;
  }
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto hit = tree.nearest(queries[q]);
    out.index[q] = hit.index;
    out.distance[q] = std::sqrt(hit.squared_distance);
  }
  return out;
}

namespace {
template <int Dim>
double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}
}  // namespace

template <int Dim>
double chamfer_brute(const std::vector<Point<Dim>>& a, const std::vector<Point<Dim>>& b) {
  return 0.5 * (mean_of<Dim>(nearest_brute<Dim>(b, a).distance) +
                mean_of<Dim>(nearest_brute<Dim>(a, b).distance));
}

template <int Dim>
double chamfer_indexed(const std::vector<Point<Dim>>& a, const std::vector<Point<Dim>>& b, Exec exec) {
  const KdTree<Dim> tree_a(a);
  const KdTree<Dim> tree_b(b);
  return 0.5 * (mean_of<Dim>(nearest_indexed<Dim>(tree_b, a, exec).distance) +
                mean_of<Dim>(nearest_indexed<Dim>(tree_a, b, exec).distance));
}

PairMin min_pair_brute(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double best = std::numeric_limits<double>::infinity();
  PairMin out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d2 = (a[i] - b[j]).squaredNorm();
      if (d2 < best) {
        best = d2;
        out.a = static_cast<int>(i);
        out.b = static_cast<int>(j);
      }
    }
  }
  out.distance = std::sqrt(best);
  return out;
}

PairMin min_pair_indexed(const std::vector<Vec3>& a, const std::vector<Vec3>& b, Exec exec) {
  const KdTree3 tree(b);
  const Nearest nn = nearest_indexed<3>(tree, a, exec);
  PairMin out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d2 = (a[i] - b[nn.index[i]]).squaredNorm();
    if (d2 < best) {
      best = d2;
      out.a = static_cast<int>(i);
      out.b = nn.index[i];
    }
  }
  out.distance = std::sqrt(best);
  return out;
}

template Nearest nearest_brute<2>(const std::vector<Point<2>>&, const std::vector<Point<2>>&);
template Nearest nearest_brute<3>(const std::vector<Point<3>>&, const std::vector<Point<3>>&);
template Nearest nearest_indexed<2>(const KdTree<2>&, const std::vector<Point<2>>&, Exec);
template Nearest nearest_indexed<3>(const KdTree<3>&, const std::vector<Point<3>>&, Exec);
template double chamfer_brute<2>(const std::vector<Point<2>>&, const std::vector<Point<2>>&);
template double chamfer_brute<3>(const std::vector<Point<3>>&, const std::vector<Point<3>>&);
template double chamfer_indexed<2>(const std::vector<Point<2>>&, const std::vector<Point<2>>&, Exec);
template double chamfer_indexed<3>(const std::vector<Point<3>>&, const std::vector<Point<3>>&, Exec);

}  // namespace affordfit::kernels
