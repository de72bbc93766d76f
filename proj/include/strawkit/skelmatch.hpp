#pragma once

#include <span>
#include <vector>

#include "strawkit/pointcloud_io.hpp"

namespace strawkit::match {

using io::Skeleton;

struct MatchParams {
  double s_dense = 0.3;          // mm, maximum edge length after densification
  double t_match = 0.396;        // mm, vertex match threshold
  double t_line = 0.396;         // mm, segment rescue threshold
  double unmatched_cost = 1000;  // cost of leaving a vertex without partner
};

/// Throws InvalidArgument when a parameter is non-positive or unmatched_cost <= t_match.
void validate(const MatchParams& params);

struct MatchReport {
  std::size_t gt_dense_vertices = 0;
  std::size_t est_dense_vertices = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t line_positives = 0;
  std::vector<long> match;  // dense GT vertex -> dense estimate vertex, -1 if unmatched
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_end = 0;
  std::size_t n_seg = 0;
  double l_matched = 0.0;      // GT length covered by matched edges / GT length
  double l_matched_est = 0.0;  // estimate length whose vertices are all positives / estimate length
  double longest_path_est = 0.0;
  double longest_path_gt = 0.0;
  double length_ape = 0.0;  // |L* - L| / L*, NaN when the GT has no length
};

/// Subdivides every edge into ceil(length / s_dense) equal collinear pieces. Original
/// vertices keep their indices; inserted vertices are appended in edge order.
Skeleton densify(const Skeleton& skel, double s_dense);

/// Thresholded vertex matching between densified graphs plus segment rescue of
/// unmatched estimate vertices. Throws EmptySkeleton when either input has no vertices.
MatchReport match_graphs(const Skeleton& gt, const Skeleton& est, const MatchParams& params = {});

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision, recall and F1; each is 0 when its denominator is 0.
Prf prf(std::size_t tp, std::size_t fp, std::size_t fn);

/// Length of edges whose two endpoints are matched, over the total length.
double matched_length_fraction(const Skeleton& gt_dense, std::span<const long> match);

/// Mean over pairs of |L* - L| / L*, L the estimate's longest path and L* the GT's.
/// Throws LengthMismatch for unequal or empty lists and ZeroGroundTruth for a GT of
/// zero length.
double length_mape(std::span<const Skeleton> gt, std::span<const Skeleton> est);

}  // namespace strawkit::match
