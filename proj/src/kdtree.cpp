#include "strawkit/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace strawkit {

KdTree::KdTree(const std::vector<Vec3>& points, std::size_t leaf_size)
    : points_(&points), leaf_size_(std::max<std::size_t>(1, leaf_size)), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points.empty()) {
    nodes_.reserve(2 * points.size() / leaf_size_ + 1);
    build(0, points.size());
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = (*points_)[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin((*points_)[order_[i]]);
    hi = hi.cwiseMax((*points_)[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double va = (*points_)[a][axis], vb = (*points_)[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  const double split = (*points_)[order_[mid]][axis];
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::knn_recursive(std::size_t node_id, const Vec3& q, std::size_t k,
                           std::vector<std::pair<double, std::size_t>>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d2 = ((*points_)[idx] - q).squaredNorm();
      const std::pair<double, std::size_t> cand{d2, idx};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::size_t first = diff < 0 ? node.left : node.right;
  const std::size_t second = diff < 0 ? node.right : node.left;
  knn_recursive(first, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().first) knn_recursive(second, q, k, heap);
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> out;
  if (nodes_.empty() || k == 0) return out;
  std::vector<std::pair<double, std::size_t>> heap;
  heap.reserve(k + 1);
  knn_recursive(0, query, k, heap);
  std::sort(heap.begin(), heap.end());
  out.reserve(heap.size());
  for (const auto& [d2, idx] : heap) out.push_back({idx, std::sqrt(d2)});
  return out;
}

void KdTree::radius_recursive(std::size_t node_id, const Vec3& q, double r2,
                              std::vector<Neighbor>& out) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d2 = ((*points_)[idx] - q).squaredNorm();
      if (d2 <= r2) out.push_back({idx, d2});
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  if (diff <= 0 || diff * diff <= r2) radius_recursive(node.left, q, r2, out);
  if (diff >= 0 || diff * diff <= r2) radius_recursive(node.right, q, r2, out);
}

std::vector<Neighbor> KdTree::radius(const Vec3& query, double r) const {
  std::vector<Neighbor> out;
  if (nodes_.empty() || r < 0) return out;
  radius_recursive(0, query, r * r, out);
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  for (auto& n : out) n.distance = std::sqrt(n.distance);
  return out;
}

Neighbor KdTree::nearest(const Vec3& query) const {
  auto r = knn(query, 1);
  return r.empty() ? Neighbor{0, std::numeric_limits<double>::infinity()} : r.front();
}

}  // namespace strawkit
