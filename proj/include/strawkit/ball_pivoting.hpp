#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "strawkit/geometry.hpp"
#include "strawkit/kdtree.hpp"

namespace strawkit::leaf {

/// Per-point unit normals from k-nearest-neighbour PCA, oriented consistently by
/// propagation over a minimum spanning tree of the neighbourhood graph. The first
/// point of every connected component is oriented to agree with `reference`.
std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, std::size_t k, const Vec3& reference);

/// Ball-pivoting surface reconstruction. Each run() is one pass at a given radius;
/// later passes re-pivot the current boundary with the new radius before seeding.
/// Seeds are scanned in index order, so the first seed is the lexicographically
/// smallest valid triangle.
class BallPivoter {
 public:
  BallPivoter(std::vector<Vec3> points, std::vector<Vec3> normals);
  BallPivoter(const BallPivoter&) = delete;
  BallPivoter& operator=(const BallPivoter&) = delete;

  void run(double radius);

  [[nodiscard]] const std::vector<Vec3>& points() const { return points_; }
  [[nodiscard]] const std::vector<std::array<std::size_t, 3>>& triangles() const { return triangles_; }

 private:
  struct FrontEdge {
    std::size_t s, t, opposite;
    Vec3 center;
  };
  struct EdgeInfo {
    int count = 0;
    std::size_t triangle = 0;  // first triangle using the edge
  };

  static std::pair<std::size_t, std::size_t> key(std::size_t a, std::size_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  std::optional<Vec3> ball_center(std::size_t a, std::size_t b, std::size_t c, double radius) const;
  bool ball_empty(const Vec3& center, double radius, std::size_t a, std::size_t b, std::size_t c) const;
  bool find_seed(double radius);
  void expand(double radius);
  void add_triangle(std::size_t a, std::size_t b, std::size_t c, const Vec3& center);
  void touch_edge(std::size_t a, std::size_t b, std::size_t opposite, std::size_t tri, const Vec3& center);

  std::vector<Vec3> points_;
  std::vector<Vec3> normals_;
  KdTree tree_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::set<std::array<std::size_t, 3>> triangle_set_;
  std::map<std::pair<std::size_t, std::size_t>, EdgeInfo> edges_;
  std::set<std::pair<std::size_t, std::size_t>> directed_;
  std::vector<int> border_degree_;  // incident edges used by exactly one triangle
  std::vector<char> used_;
  std::deque<FrontEdge> front_;
  std::size_t seed_cursor_ = 0;
};

}  // namespace strawkit::leaf
