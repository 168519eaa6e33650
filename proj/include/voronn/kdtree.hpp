#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "voronn/errors.hpp"

namespace voronn {

// Covariate sample: n rows of d-dimensional points.
struct PointSet {
  Eigen::MatrixXd points;  // n x d

  Eigen::Index n() const { return points.rows(); }
  Eigen::Index d() const { return points.cols(); }
};

// Result of a K-nearest query. Distances are sorted ascending; ties are
// broken by smaller sample index, so the neighbor set is unique.
struct Neighborhood {
  Eigen::VectorXd query;
  std::vector<int> indices;
  std::vector<double> distances;
};

// Exact K-nearest-neighbor index over a fixed point set (Euclidean norm).
// Immutable after construction; concurrent queries are safe.
class NeighborIndex {
public:
  explicit NeighborIndex(PointSet points) : pts_(std::move(points)) {
    const Eigen::Index n = pts_.n();
    if (n < 1) throw input_error("point set must contain at least one point");
    if (pts_.d() < 1) throw input_error("dimension must be at least 1");
    if (!pts_.points.allFinite())
      throw input_error("point set contains non-finite coordinates");
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * static_cast<std::size_t>(n) / kLeafSize + 2);
    root_ = build(0, static_cast<int>(n));
  }

  Eigen::Index n() const { return pts_.n(); }
  Eigen::Index d() const { return pts_.d(); }
  const PointSet& points() const { return pts_; }

  Neighborhood k_nearest(const Eigen::VectorXd& z, int K) const {
    if (z.size() != pts_.d())
      throw input_error("query dimension does not match index dimension");
    if (K < 1) throw input_error("K must be at least 1");
    if (K > pts_.n()) throw input_error("K exceeds the number of sample points");

    Best best(K);
    search(root_, z, best);

    Neighborhood out;
    out.query = z;
    std::sort(best.items.begin(), best.items.end());
    out.indices.reserve(best.items.size());
    out.distances.reserve(best.items.size());
    for (const auto& [d2, idx] : best.items) {
      out.indices.push_back(idx);
      out.distances.push_back(std::sqrt(d2));
    }
    return out;
  }

private:
  static constexpr int kLeafSize = 16;

  struct Node {
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
    int axis = 0;
    double split = 0.0;
    bool leaf = false;
  };

  // Running set of K best (squared distance, index) pairs, worst on top.
  struct Best {
    explicit Best(int K) : cap(static_cast<std::size_t>(K)) {
      items.reserve(cap + 1);
    }
    std::size_t cap;
    std::vector<std::pair<double, int>> items;  // max-heap

    double worst() const { return items.front().first; }
    bool full() const { return items.size() == cap; }

    void offer(double d2, int idx) {
      if (full()) {
        const auto& top = items.front();
        if (d2 > top.first || (d2 == top.first && idx > top.second)) return;
        std::pop_heap(items.begin(), items.end());
        items.pop_back();
      }
      items.emplace_back(d2, idx);
      std::push_heap(items.begin(), items.end());
    }
  };

  int build(int begin, int end) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.leaf = true;
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    // Split on the axis of largest spread at the median.
    int axis = 0;
    double best_spread = -1.0;
    for (int a = 0; a < pts_.d(); ++a) {
      double lo = pts_.points(order_[begin], a), hi = lo;
      for (int i = begin; i < end; ++i) {
        const double v = pts_.points(order_[i], a);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        axis = a;
      }
    }
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](int a, int b) {
                       const double va = pts_.points(a, axis);
                       const double vb = pts_.points(b, axis);
                       return va < vb || (va == vb && a < b);
                     });
    node.axis = axis;
    node.split = pts_.points(order_[mid], axis);
    nodes_.push_back(node);
    const int self = static_cast<int>(nodes_.size()) - 1;
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void search(int node_id, const Eigen::VectorXd& z, Best& best) const {
    const Node& node = nodes_[node_id];
    if (node.leaf) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const double d2 = (pts_.points.row(idx).transpose() - z).squaredNorm();
        best.offer(d2, idx);
      }
      return;
    }
    const double delta = z[node.axis] - node.split;
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    search(near, z, best);
    // A point at exactly the bounding distance can still win on the index
    // tie-break, so only prune on strict inequality.
    if (!best.full() || delta * delta <= best.worst()) search(far, z, best);
  }

  PointSet pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace voronn
