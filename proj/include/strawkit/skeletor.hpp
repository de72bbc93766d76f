#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "strawkit/geometry.hpp"
#include "strawkit/pointcloud_io.hpp"

namespace strawkit::skel {

using io::Skeleton;

/// Weighted undirected adjacency list.
using Adjacency = std::vector<std::vector<std::pair<std::size_t, double>>>;

Adjacency adjacency(const Skeleton& skel);

/// Single-source shortest paths; unreachable vertices get +inf and predecessor SIZE_MAX.
struct ShortestPaths {
  std::vector<double> distance;
  std::vector<std::size_t> predecessor;
};
ShortestPaths dijkstra(const Adjacency& adj, std::size_t source);

/// Degree-1 vertices, ascending.
std::vector<std::size_t> endpoints(const Skeleton& skel);

/// Connected components; isolated vertices count.
std::size_t segments(const Skeleton& skel);

/// Component label per vertex, labels numbered in order of first vertex.
std::vector<std::size_t> component_labels(const Skeleton& skel);

struct LongestPath {
  double length = 0.0;
  std::vector<std::size_t> path;
};

/// Weighted diameter over all components; ties go to the lexicographically
/// smallest (start, end) pair. Throws NoEdges.
LongestPath longest_path(const Skeleton& skel);

/// k-NN neighbourhood graph over points, symmetrised; weights are Euclidean
/// distances clamped to a tiny positive floor for coincident points.
struct NeighborhoodGraph {
  Adjacency adj;
};
NeighborhoodGraph neighborhood_graph(const std::vector<Vec3>& points, std::size_t k);

struct SkeletonParams {
  int bin_count = 10;
  std::size_t knn = 10;
  std::optional<Vec3> root;  // unset: lowest point (minimum z)
  double som_fraction = 0.01;
  std::size_t som_min_nodes = 2;
  int som_epochs = 200;
  double som_lr_start = 0.5;
  double som_lr_end = 0.01;
  double som_sigma_end = 0.5;  // start is n_nodes / 4
  std::uint64_t rng_seed = 7;
};

/// Throws InvalidArgument when the parameters violate their bounds.
void validate(const SkeletonParams& params);

struct SkeletonResult {
  Skeleton skeleton;
  std::vector<std::string> warnings;
};

/// Geodesic binning skeleton: k-NN graph, shortest paths from the root, equal-width
/// distance bins, connectivity clusters per bin, centroid vertices linked to the
/// cluster holding each cluster's geodesic predecessor. Components with more than one
/// cluster are anchored at the root point and at the farthest point of each tip cluster.
/// Components not reachable from the root are processed from their own lowest point.
SkeletonResult shortest_path_skeleton(const std::vector<Vec3>& points, const SkeletonParams& params);

/// Node count used by som_skeleton for a cloud of n points.
std::size_t som_node_count(std::size_t n, const SkeletonParams& params);

/// 1D self-organising map chain fitted to the points.
SkeletonResult som_skeleton(const std::vector<Vec3>& points, const SkeletonParams& params);

enum class SkeletonMethod { ShortestPath, Som };

/// Accepts "sp" and "som". Throws InvalidArgument.
SkeletonMethod parse_skeleton_method(std::string_view name);
std::string_view to_string(SkeletonMethod method);

SkeletonResult skeletonize(const std::vector<Vec3>& points, SkeletonMethod method, const SkeletonParams& params);

}  // namespace strawkit::skel
