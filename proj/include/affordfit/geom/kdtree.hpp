#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace affordfit {

/// Static k-d tree for exact nearest-neighbour queries. Ties on distance
/// resolve to the smallest original index so results match a brute-force scan
/// bit for bit.
template <int Dim>
class KdTree {
 public:
  using Point = Eigen::Matrix<double, Dim, 1>;

  struct Hit {
    int index = -1;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  KdTree() = default;

  explicit KdTree(const std::vector<Point>& points, int leaf_size = 8) : leaf_size_(leaf_size) {
    const int n = static_cast<int>(points.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    nodes_.reserve(n > 0 ? 2 * (n / std::max(1, leaf_size_)) + 2 : 0);
    if (n > 0) build(points, order, 0, n);
    points_.resize(n);
    index_.resize(n);
    for (int i = 0; i < n; ++i) {
      points_[i] = points[order[i]];
      index_[i] = order[i];
    }
  }

  int size() const { return static_cast<int>(points_.size()); }
  bool empty() const { return points_.empty(); }

  Hit nearest(const Point& query) const {
    Hit best;
    if (!nodes_.empty()) search(0, query, best);
    return best;
  }

 private:
  struct Node {
    int begin = 0;
    int end = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(const std::vector<Point>& points, std::vector<int>& order, int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= leaf_size_) return id;

    Point lo = points[order[begin]];
    Point hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points[order[i]]);
      hi = hi.cwiseMax(points[order[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) { return points[a][axis] < points[b][axis]; });
    const double split = points[order[mid]][axis];
    const int left = build(points, order, begin, mid);
    const int right = build(points, order, mid, end);
    Node& node = nodes_[id];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  void search(int id, const Point& q, Hit& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const double d2 = (points_[i] - q).squaredNorm();
        if (d2 < best.squared_distance || (d2 == best.squared_distance && index_[i] < best.index)) {
          best.squared_distance = d2;
          best.index = index_[i];
        }
      }
      return;
    }
    // left holds coordinates <= split, right holds coordinates >= split.
    const double diff = q[node.axis] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, best);
    if (diff * diff <= best.squared_distance) search(far, q, best);
  }

  int leaf_size_ = 8;
  std::vector<Node> nodes_;
  std::vector<Point> points_;
  std::vector<int> index_;
};

using KdTree2 = KdTree<2>;
using KdTree3 = KdTree<3>;

}  // namespace affordfit
