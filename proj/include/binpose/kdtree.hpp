#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace binpose {

/// Static 3D kd-tree over a point set, median split, built once and then
/// read-only (shareable across threads).
class KdTree3 {
 public:
  KdTree3() = default;

  explicit KdTree3(std::vector<Eigen::Vector3d> points)
      : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) root_ = build(0, order_.size());
  }

  std::size_t size() const { return points_.size(); }

  struct Nearest {
    std::size_t index = 0;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  /// Index of the nearest point to the query, brute-force-equivalent.
  Nearest nearest(const Eigen::Vector3d& query) const {
    Nearest best;
    if (root_ >= 0) search(root_, query, best);
    return best;
  }

  const Eigen::Vector3d& point(std::size_t index) const {
    return points_[index];
  }

 private:
  struct Node {
    std::size_t point = 0;  // index into points_
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t begin, std::size_t end) {
    Eigen::Vector3d lo = points_[order_[begin]];
    Eigen::Vector3d hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [this, axis](std::size_t a, std::size_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    Node node;
    node.point = order_[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (mid > begin) nodes_[self].left = build(begin, mid);
    if (mid + 1 < end) nodes_[self].right = build(mid + 1, end);
    return self;
  }

  void search(int node_index, const Eigen::Vector3d& query,
              Nearest& best) const {
    const Node& node = nodes_[node_index];
    const Eigen::Vector3d& p = points_[node.point];
    const double d2 = (p - query).squaredNorm();
    if (d2 < best.squared_distance) {
      best.squared_distance = d2;
      best.index = node.point;
    }
    const double delta = query[node.axis] - p[node.axis];
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    if (near >= 0) search(near, query, best);
    if (far >= 0 && delta * delta < best.squared_distance) {
      search(far, query, best);
    }
  }

  std::vector<Eigen::Vector3d> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace binpose
