#pragma once

// Nearest-neighbour kernels. Each operation has a brute-force serial reference
// and an indexed variant that can run its query loop under OpenMP; tests pin
// the two together and bench/ compares their throughput.

#include "affordfit/geom/kdtree.hpp"
#include "affordfit/types.hpp"

#include <vector>

namespace affordfit::kernels {

enum class Exec { serial, parallel };

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;

struct Nearest {
  std::vector<int> index;
  std::vector<double> distance;  // Euclidean, unsquared
};

template <int Dim>
Nearest nearest_brute(const std::vector<Point<Dim>>& reference, const std::vector<Point<Dim>>& queries);

template <int Dim>
Nearest nearest_indexed(const KdTree<Dim>& tree, const std::vector<Point<Dim>>& queries, Exec exec);

/// 0.5 * (mean over a of NN distance into b + mean over b of NN distance into a).
template <int Dim>
double chamfer_brute(const std::vector<Point<Dim>>& a, const std::vector<Point<Dim>>& b);

template <int Dim>
double chamfer_indexed(const std::vector<Point<Dim>>& a, const std::vector<Point<Dim>>& b, Exec exec);

/// Closest pair between two clouds; ties resolve to the smallest (a, b) index pair.
struct PairMin {
  double distance = 0.0;
  int a = -1;
  int b = -1;
};

PairMin min_pair_brute(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
PairMin min_pair_indexed(const std::vector<Vec3>& a, const std::vector<Vec3>& b, Exec exec);

namespace detail {
// OpenMP query loop; defined in nearest_omp.cpp.
template <int Dim>
void nearest_indexed_omp(const KdTree<Dim>& tree, const std::vector<Point<Dim>>& queries, Nearest& out);
}  // namespace detail

}  // namespace affordfit::kernels
