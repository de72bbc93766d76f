#include "strawkit/ball_pivoting.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "strawkit/error.hpp"

namespace strawkit::leaf {

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, std::size_t k, const Vec3& reference) {
  const std::size_t n = points.size();
  std::vector<Vec3> normals(n, reference.normalized());
  if (n < 3) return normals;
  const KdTree tree(points);
  const std::size_t kk = std::min(n, std::max<std::size_t>(k, 3) + 1);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = tree.knn(points[i], kk);
    Vec3 mean = Vec3::Zero();
    for (const auto& nb : nbrs) mean += points[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& nb : nbrs) {
      const Vec3 d = points[nb.index] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    Vec3 nrm = es.eigenvectors().col(0);
    if (nrm.norm() > 0) normals[i] = nrm.normalized();
    for (const auto& nb : nbrs) {
      if (nb.index == i) continue;
      adj[i].push_back(nb.index);
      adj[nb.index].push_back(i);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  // Prim's MST on weights 1 - |n_i . n_j|, flipping children to agree with parents.
  std::vector<char> done(n, 0);
  using Item = std::tuple<double, std::size_t, std::size_t>;  // weight, to, from
  for (std::size_t root = 0; root < n; ++root) {
    if (done[root]) continue;
    if (normals[root].dot(reference) < 0) normals[root] = -normals[root];
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    done[root] = 1;
    for (std::size_t j : adj[root]) pq.emplace(1.0 - std::abs(normals[root].dot(normals[j])), j, root);
    while (!pq.empty()) {
      const auto [w, to, from] = pq.top();
      pq.pop();
      if (done[to]) continue;
      done[to] = 1;
      if (normals[to].dot(normals[from]) < 0) normals[to] = -normals[to];
      for (std::size_t j : adj[to])
        if (!done[j]) pq.emplace(1.0 - std::abs(normals[to].dot(normals[j])), j, to);
    }
  }
  return normals;
}

BallPivoter::BallPivoter(std::vector<Vec3> points, std::vector<Vec3> normals)
    : points_(std::move(points)),
      normals_(std::move(normals)),
      tree_(points_),
      border_degree_(points_.size(), 0),
      used_(points_.size(), 0) {
  if (normals_.size() != points_.size())
    throw Error(ErrorCode::InvalidArgument, "normals and points differ in size");
}

std::optional<Vec3> BallPivoter::ball_center(std::size_t a, std::size_t b, std::size_t c,
                                             double radius) const {
  const Vec3& pa = points_[a];
  const Vec3 ab = points_[b] - pa;
  const Vec3 ac = points_[c] - pa;
  const Vec3 n = ab.cross(ac);
  const double n2 = n.squaredNorm();
  if (n2 <= 1e-24 * ab.squaredNorm() * ac.squaredNorm() || n2 == 0.0) return std::nullopt;
  const Vec3 to_cc = (ac.squaredNorm() * n.cross(ab) + ab.squaredNorm() * ac.cross(n)) / (2.0 * n2);
  const double r2 = to_cc.squaredNorm();
  const double h2 = radius * radius - r2;
  if (h2 < 0.0) return std::nullopt;
  return Vec3(pa + to_cc + std::sqrt(h2) * n / std::sqrt(n2));
}

bool BallPivoter::ball_empty(const Vec3& center, double radius, std::size_t a, std::size_t b,
                             std::size_t c) const {
  for (const auto& nb : tree_.radius(center, radius * (1.0 - 1e-9)))
    if (nb.index != a && nb.index != b && nb.index != c) return false;
  return true;
}

void BallPivoter::touch_edge(std::size_t a, std::size_t b, std::size_t opposite, std::size_t tri,
                             const Vec3& center) {
  EdgeInfo& info = edges_[key(a, b)];
  ++info.count;
  directed_.insert({a, b});
  if (info.count == 1) {
    info.triangle = tri;
    ++border_degree_[a];
    ++border_degree_[b];
    front_.push_back({a, b, opposite, center});
  } else if (info.count == 2) {
    --border_degree_[a];
    --border_degree_[b];
  }
}

void BallPivoter::add_triangle(std::size_t a, std::size_t b, std::size_t c, const Vec3& center) {
  const std::size_t tri = triangles_.size();
  triangles_.push_back({a, b, c});
  std::array<std::size_t, 3> sorted{a, b, c};
  std::sort(sorted.begin(), sorted.end());
  triangle_set_.insert(sorted);
  used_[a] = used_[b] = used_[c] = 1;
  touch_edge(a, b, c, tri, center);
  touch_edge(b, c, a, tri, center);
  touch_edge(c, a, b, tri, center);
}

bool BallPivoter::find_seed(double radius) {
  for (; seed_cursor_ < points_.size(); ++seed_cursor_) {
    const std::size_t i = seed_cursor_;
    if (used_[i]) continue;
    std::vector<std::size_t> cand;
    for (const auto& nb : tree_.radius(points_[i], 2.0 * radius))
      if (nb.index != i && !used_[nb.index]) cand.push_back(nb.index);
    std::sort(cand.begin(), cand.end());
    for (std::size_t x = 0; x < cand.size(); ++x) {
      for (std::size_t y = x + 1; y < cand.size(); ++y) {
        std::size_t j = cand[x], k = cand[y];
        const Vec3 n = (points_[j] - points_[i]).cross(points_[k] - points_[i]);
        const double agree = n.dot(normals_[i] + normals_[j] + normals_[k]);
        if (agree == 0.0) continue;
        if (agree < 0.0) std::swap(j, k);
        const auto center = ball_center(i, j, k, radius);
        if (!center || !ball_empty(*center, radius, i, j, k)) continue;
        add_triangle(i, j, k, *center);
        return true;
      }
    }
  }
  return false;
}

void BallPivoter::expand(double radius) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  while (!front_.empty()) {
    const FrontEdge e = front_.front();
    front_.pop_front();
    const auto it = edges_.find(key(e.s, e.t));
    if (it == edges_.end() || it->second.count != 1) continue;

    const Vec3& ps = points_[e.s];
    const Vec3& pt = points_[e.t];
    const Vec3 mid = 0.5 * (ps + pt);
    const Vec3 axis = (pt - ps).normalized();
    Vec3 u = e.center - mid;
    u -= axis * axis.dot(u);

    std::size_t best = 0;
    double best_angle = std::numeric_limits<double>::infinity();
    Vec3 best_center = Vec3::Zero();
    for (const auto& nb : tree_.radius(mid, 2.0 * radius)) {
      const std::size_t k = nb.index;
      if (k == e.s || k == e.t || k == e.opposite) continue;
      const Vec3 nt = (ps - pt).cross(points_[k] - pt);
      if (nt.dot(normals_[e.s] + normals_[e.t] + normals_[k]) <= 0.0) continue;
      const auto c = ball_center(e.t, e.s, k, radius);
      if (!c) continue;
      Vec3 v = *c - mid;
      v -= axis * axis.dot(v);
      double angle = std::atan2(axis.dot(u.cross(v)), u.dot(v));
      if (angle < 0.0) angle += kTwoPi;
      if (angle > kTwoPi - 1e-9) angle = 0.0;
      if (angle < best_angle || (angle == best_angle && k < best)) {
        best_angle = angle;
        best = k;
        best_center = *c;
      }
    }
    if (!std::isfinite(best_angle)) continue;  // boundary edge
    const std::size_t k = best;
    if (!ball_empty(best_center, radius, e.s, e.t, k)) continue;

    std::array<std::size_t, 3> sorted{e.s, e.t, k};
    std::sort(sorted.begin(), sorted.end());
    if (triangle_set_.count(sorted)) continue;
    const auto sk = edges_.find(key(e.s, k));
    const auto kt = edges_.find(key(k, e.t));
    if (sk != edges_.end() && (sk->second.count >= 2 || directed_.count({e.s, k}))) continue;
    if (kt != edges_.end() && (kt->second.count >= 2 || directed_.count({k, e.t}))) continue;
    if (used_[k] && border_degree_[k] == 0) continue;  // interior vertex

    add_triangle(e.t, e.s, k, best_center);
  }
}

void BallPivoter::run(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
  front_.clear();
  for (const auto& [k, info] : edges_) {
    if (info.count != 1) continue;
    const auto& tri = triangles_[info.triangle];
    for (int c = 0; c < 3; ++c) {
      const std::size_t s = tri[c], t = tri[(c + 1) % 3], o = tri[(c + 2) % 3];
      if (key(s, t) != k) continue;
      if (const auto center = ball_center(s, t, o, radius)) front_.push_back({s, t, o, *center});
    }
  }
  expand(radius);
  seed_cursor_ = 0;
  while (find_seed(radius)) expand(radius);
}

}  // namespace strawkit::leaf
