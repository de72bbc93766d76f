#include "strawkit/skelmatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "strawkit/assignment.hpp"
#include "strawkit/error.hpp"
#include "strawkit/kdtree.hpp"
#include "strawkit/skeletor.hpp"

namespace strawkit::match {

void validate(const MatchParams& p) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(p.s_dense) || !positive(p.t_match) || !positive(p.t_line) || !positive(p.unmatched_cost))
    throw Error(ErrorCode::InvalidArgument, "match parameters must be positive and finite");
  if (!(p.unmatched_cost > p.t_match))
    throw Error(ErrorCode::InvalidArgument, "unmatched_cost must exceed t_match");
}

Skeleton densify(const Skeleton& skel, double s_dense) {
  if (!(s_dense > 0.0)) throw Error(ErrorCode::InvalidArgument, "s_dense must be positive");
  Skeleton out;
  out.vertices = skel.vertices;
  out.edges.reserve(skel.edges.size());
  for (const auto& e : skel.edges) {
    const Vec3 a = skel.vertices[e.a];
    const Vec3 b = skel.vertices[e.b];
    // The relative slack keeps exact multiples (e.g. 0.9 / 0.3) from gaining a piece
    // through rounding.
    const double ratio = (b - a).norm() / s_dense;
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12))));
    std::size_t prev = e.a;
    for (std::size_t j = 1; j < pieces; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(pieces);
      out.vertices.push_back(a + t * (b - a));
      const std::size_t cur = out.vertices.size() - 1;
      out.edges.push_back({prev, cur});
      prev = cur;
    }
    out.edges.push_back({prev, e.b});
  }
  return out;
}

Prf prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf r;
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double matched_length_fraction(const Skeleton& gt_dense, std::span<const long> match) {
  if (match.size() != gt_dense.vertices.size())
    throw Error(ErrorCode::LengthMismatch, "match map does not cover the graph vertices");
  double covered = 0.0, total = 0.0;
  for (const auto& e : gt_dense.edges) {
    const double len = gt_dense.edge_length(e);
    total += len;
    if (match[e.a] >= 0 && match[e.b] >= 0) covered += len;
  }
  if (total > 0.0) return covered / total;
  // No length to cover: complete only when every vertex is matched.
  for (long m : match)
    if (m < 0) return 0.0;
  return 1.0;
}

namespace {

double longest_or_zero(const Skeleton& s) {
  return s.edges.empty() ? 0.0 : skel::longest_path(s).length;
}

}  // namespace

double length_mape(std::span<const Skeleton> gt, std::span<const Skeleton> est) {
  if (gt.size() != est.size() || gt.empty())
    throw Error(ErrorCode::LengthMismatch, "length_mape needs equally sized, non-empty lists");
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double truth = longest_or_zero(gt[i]);
    if (!(truth > 0.0)) throw Error(ErrorCode::ZeroGroundTruth, "ground-truth skeleton has zero length");
    sum += std::abs(truth - longest_or_zero(est[i])) / truth;
  }
  return sum / static_cast<double>(gt.size());
}

MatchReport match_graphs(const Skeleton& gt, const Skeleton& est, const MatchParams& params) {
  validate(params);
  if (gt.vertices.empty() || est.vertices.empty())
    throw Error(ErrorCode::EmptySkeleton, "skeleton has no vertices");

  const Skeleton g = densify(gt, params.s_dense);
  const Skeleton e = densify(est, params.s_dense);
  MatchReport r;
  r.gt_dense_vertices = g.vertices.size();
  r.est_dense_vertices = e.vertices.size();

  // Only pairs within t_match can be real matches; every other entry of the cost
  // matrix equals unmatched_cost, so the padded square problem reduces to a sparse one.
  const KdTree est_tree(e.vertices);
  std::vector<std::vector<SparseEntry>> rows(g.vertices.size());
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    for (const auto& nb : est_tree.radius(g.vertices[i], params.t_match * (1.0 + 1e-9))) {
      const double d = (g.vertices[i] - e.vertices[nb.index]).norm();
      if (d <= params.t_match) rows[i].push_back({nb.index, d});
    }
  }
  const Assignment assignment = sparse_assignment(e.vertices.size(), rows, params.unmatched_cost);

  r.match.assign(g.vertices.size(), -1);
  std::vector<char> est_state(e.vertices.size(), 0);  // 0 unmatched, 1 matched, 2 rescued
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    const std::size_t j = assignment.row_to_col[i];
    if (j == kUnassigned) continue;
    r.match[i] = static_cast<long>(j);
    est_state[j] = 1;
    ++r.tp;
  }
  r.fn = g.vertices.size() - r.tp;

  // Segment rescue. Branch polylines are unions of edges, so the distance to the
  // nearest branch is the distance to the nearest edge (or to an isolated vertex).
  // Dense edges are at most s_dense long, so any edge within t_line has an endpoint
  // within t_line + s_dense / 2.
  const KdTree gt_tree(g.vertices);
  const auto gt_adj = skel::adjacency(g);
  const double reach = params.t_line + 0.5 * params.s_dense;
  for (std::size_t j = 0; j < e.vertices.size(); ++j) {
    if (est_state[j] != 0) continue;
    const Vec3& p = e.vertices[j];
    bool near = false;
    for (const auto& nb : gt_tree.radius(p, reach * (1.0 + 1e-9))) {
      const std::size_t v = nb.index;
      if (gt_adj[v].empty() && (p - g.vertices[v]).norm() <= params.t_line) near = true;
      for (const auto& [w, len] : gt_adj[v]) {
        (void)len;
        if (point_segment_distance(p, g.vertices[v], g.vertices[w]) <= params.t_line) {
          near = true;
          break;
        }
      }
      if (near) break;
    }
    if (near) {
      est_state[j] = 2;
      ++r.line_positives;
    } else {
      ++r.fp;
    }
  }

  const Prf m = prf(r.tp, r.fp, r.fn);
  r.precision = m.precision;
  r.recall = m.recall;
  r.f1 = m.f1;
  r.n_end = skel::endpoints(est).size();
  r.n_seg = skel::segments(est);
  r.l_matched = matched_length_fraction(g, r.match);

  double est_total = 0.0, est_covered = 0.0;
  for (const auto& edge : e.edges) {
    const double len = e.edge_length(edge);
    est_total += len;
    if (est_state[edge.a] != 0 && est_state[edge.b] != 0) est_covered += len;
  }
  r.l_matched_est = est_total > 0.0 ? est_covered / est_total : (r.fp == 0 ? 1.0 : 0.0);

  r.longest_path_gt = longest_or_zero(gt);
  r.longest_path_est = longest_or_zero(est);
  r.length_ape = r.longest_path_gt > 0.0 ? std::abs(r.longest_path_gt - r.longest_path_est) / r.longest_path_gt
                                         : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace strawkit::match
