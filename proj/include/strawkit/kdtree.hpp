#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "strawkit/geometry.hpp"

namespace strawkit {

struct Neighbor {
  std::size_t index;
  double distance;
};

/// Static 3D kd-tree over a borrowed point array. The points must outlive the tree.
/// Query results are ordered by (distance, index) so callers get deterministic output.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points, std::size_t leaf_size = 12);

  [[nodiscard]] std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;
  [[nodiscard]] std::vector<Neighbor> radius(const Vec3& query, double r) const;
  [[nodiscard]] Neighbor nearest(const Vec3& query) const;

  [[nodiscard]] std::size_t size() const { return points_->size(); }

 private:
  struct Node {
    std::size_t begin, end;  // range in order_
    int axis = -1;           // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void knn_recursive(std::size_t node, const Vec3& q, std::size_t k,
                     std::vector<std::pair<double, std::size_t>>& heap) const;
  void radius_recursive(std::size_t node, const Vec3& q, double r2,
                        std::vector<Neighbor>& out) const;

  const std::vector<Vec3>* points_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace strawkit
