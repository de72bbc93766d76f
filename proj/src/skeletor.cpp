#include "strawkit/skeletor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "strawkit/error.hpp"
#include "strawkit/kdtree.hpp"

namespace strawkit::skel {
namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::size_t lowest_point(const std::vector<Vec3>& pts, const std::vector<std::size_t>& subset) {
  std::size_t best = subset.front();
  for (std::size_t i : subset)
    if (pts[i].z() < pts[best].z() || (pts[i].z() == pts[best].z() && i < best)) best = i;
  return best;
}

// Skeletonises one connected component of the neighbourhood graph.
void skeletonize_component(const std::vector<Vec3>& pts, const Adjacency& adj,
                           const std::vector<std::size_t>& members, std::size_t root, int bin_count,
                           Skeleton& out) {
  // Dijkstra restricted to this component (the graph has no edges leaving it).
  const ShortestPaths sp = dijkstra(adj, root);
  double max_d = 0.0;
  for (std::size_t i : members) max_d = std::max(max_d, sp.distance[i]);
  const double width = max_d / bin_count;
  std::vector<int> bin(pts.size(), -1);
  for (std::size_t i : members) {
    int b = width > 0.0 ? static_cast<int>(std::floor(sp.distance[i] / width)) : 0;
    bin[i] = std::clamp(b, 0, bin_count - 1);
  }

  UnionFind uf(pts.size());
  for (std::size_t i : members)
    for (const auto& [j, w] : adj[i])
      if (bin[i] == bin[j]) uf.unite(i, j);

  // Clusters ordered by (bin, smallest member index).
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t i : members) by_root[uf.find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> clusters;
  for (auto& [r, list] : by_root) clusters.push_back(std::move(list));
  std::sort(clusters.begin(), clusters.end(), [&](const auto& a, const auto& b) {
    return std::make_pair(bin[a.front()], a.front()) < std::make_pair(bin[b.front()], b.front());
  });
  std::vector<std::size_t> cluster_of(pts.size(), SIZE_MAX);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (std::size_t i : clusters[c]) cluster_of[i] = c;

  const std::size_t base = out.vertices.size();
  for (const auto& c : clusters) {
    Vec3 sum = Vec3::Zero();
    for (std::size_t i : c) sum += pts[i];
    out.vertices.push_back(sum / static_cast<double>(c.size()));
  }

  const std::size_t root_cluster = cluster_of[root];
  std::vector<std::size_t> children(clusters.size(), 0);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (c == root_cluster) continue;
    std::size_t m = clusters[c].front();
    for (std::size_t i : clusters[c])
      if (sp.distance[i] < sp.distance[m] || (sp.distance[i] == sp.distance[m] && i < m)) m = i;
    const std::size_t parent = cluster_of[sp.predecessor[m]];
    out.edges.push_back({base + parent, base + c});
    ++children[parent];
  }

  if (clusters.size() < 2) return;
  out.vertices.push_back(pts[root]);
  out.edges.push_back({out.vertices.size() - 1, base + root_cluster});
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (c == root_cluster || children[c] != 0) continue;
    std::size_t far = clusters[c].front();
    for (std::size_t i : clusters[c])
      if (sp.distance[i] > sp.distance[far] || (sp.distance[i] == sp.distance[far] && i < far)) far = i;
    out.vertices.push_back(pts[far]);
    out.edges.push_back({base + c, out.vertices.size() - 1});
  }
}

}  // namespace

void validate(const SkeletonParams& p) {
  if (p.bin_count < 1) throw Error(ErrorCode::InvalidArgument, "bin_count must be >= 1");
  if (p.knn < 1) throw Error(ErrorCode::InvalidArgument, "knn must be >= 1");
  if (!(p.som_fraction > 0.0 && p.som_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "som_fraction must lie in (0, 1]");
  if (p.som_min_nodes < 2) throw Error(ErrorCode::InvalidArgument, "som_min_nodes must be >= 2");
  if (p.som_epochs < 1) throw Error(ErrorCode::InvalidArgument, "som_epochs must be >= 1");
  if (!(p.som_lr_start > 0 && p.som_lr_end > 0 && p.som_sigma_end > 0))
    throw Error(ErrorCode::InvalidArgument, "SOM rates must be positive");
}

NeighborhoodGraph neighborhood_graph(const std::vector<Vec3>& points, std::size_t k) {
  NeighborhoodGraph g;
  g.adj.resize(points.size());
  if (points.size() < 2) return g;
  const KdTree tree(points);
  const std::size_t kk = std::min(k, points.size() - 1) + 1;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto& nb : tree.knn(points[i], kk)) {
      if (nb.index == i) continue;
      const double w = std::max(nb.distance, 1e-12);
      g.adj[i].push_back({nb.index, w});
      g.adj[nb.index].push_back({i, w});
    }
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end(),
                        [](const auto& x, const auto& y) { return x.first == y.first; }),
            a.end());
  }
  return g;
}

SkeletonResult shortest_path_skeleton(const std::vector<Vec3>& points, const SkeletonParams& params) {
  validate(params);
  if (points.size() < 2) throw Error(ErrorCode::TooFewPoints, "shortest-path skeleton needs >= 2 points");
  const NeighborhoodGraph graph = neighborhood_graph(points, params.knn);

  UnionFind uf(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (const auto& [j, w] : graph.adj[i]) uf.unite(i, j);
  std::map<std::size_t, std::vector<std::size_t>> comps;  // keyed by smallest index
  for (std::size_t i = 0; i < points.size(); ++i) comps[uf.find(i)].push_back(i);

  std::size_t root = 0;
  if (params.root) {
    root = KdTree(points).nearest(*params.root).index;
  } else {
    std::vector<std::size_t> all(points.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    root = lowest_point(points, all);
  }

  SkeletonResult result;
  const std::size_t root_comp = uf.find(root);
  skeletonize_component(points, graph.adj, comps[root_comp], root, params.bin_count, result.skeleton);
  for (const auto& [key, members] : comps) {
    if (key == root_comp) continue;
    result.warnings.push_back("DisconnectedFromRoot: component of " + std::to_string(members.size()) +
                              " points processed from its own lowest point");
    skeletonize_component(points, graph.adj, members, lowest_point(points, members), params.bin_count,
                          result.skeleton);
  }
  return result;
}

std::size_t som_node_count(std::size_t n, const SkeletonParams& params) {
  const auto scaled = static_cast<std::size_t>(std::llround(params.som_fraction * static_cast<double>(n)));
  return std::max(params.som_min_nodes, scaled);
}

SkeletonResult som_skeleton(const std::vector<Vec3>& points, const SkeletonParams& params) {
  validate(params);
  const std::size_t n = points.size();
  if (n < params.som_min_nodes || n < 2)
    throw Error(ErrorCode::TooFewPoints, "SOM skeleton needs at least som_min_nodes points");
  const std::size_t nodes = som_node_count(n, params);

  const Vec3 mean = centroid(points);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  Vec3 axis = es.eigenvectors().col(2).normalized();
  if (params.root) {
    if (axis.dot(*params.root - mean) > 0) axis = -axis;
  } else {
    int idx = 0;
    axis.cwiseAbs().maxCoeff(&idx);
    if (axis[idx] < 0) axis = -axis;
  }
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
  for (const auto& p : points) {
    const double t = axis.dot(p - mean);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  std::vector<Vec3> w(nodes);
  for (std::size_t j = 0; j < nodes; ++j)
    w[j] = mean + axis * (tmin + (tmax - tmin) * static_cast<double>(j) / static_cast<double>(nodes - 1));

  const double sigma_start = std::max(static_cast<double>(nodes) / 4.0, params.som_sigma_end);
  const double total = static_cast<double>(params.som_epochs) * static_cast<double>(n);
  std::mt19937_64 rng(params.rng_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;
  for (int epoch = 0; epoch < params.som_epochs; ++epoch) {
    // Fisher-Yates with our own index draw keeps the sequence identical across standard libraries.
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
    for (std::size_t s : order) {
      const double f = total > 1 ? static_cast<double>(step) / (total - 1.0) : 1.0;
      const double lr = params.som_lr_start * std::pow(params.som_lr_end / params.som_lr_start, f);
      const double sigma = sigma_start * std::pow(params.som_sigma_end / sigma_start, f);
      const Vec3& x = points[s];
      std::size_t bmu = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nodes; ++j) {
        const double d = (w[j] - x).squaredNorm();
        if (d < best) {
          best = d;
          bmu = j;
        }
      }
      const double inv = 1.0 / (2.0 * sigma * sigma);
      for (std::size_t j = 0; j < nodes; ++j) {
        const double dj = static_cast<double>(j) - static_cast<double>(bmu);
        const double h = std::exp(-dj * dj * inv);
        if (h < 1e-12) continue;
        w[j] += lr * h * (x - w[j]);
      }
      ++step;
    }
  }

  SkeletonResult result;
  result.skeleton.vertices = std::move(w);
  for (std::size_t j = 0; j + 1 < nodes; ++j) result.skeleton.edges.push_back({j, j + 1});
  return result;
}

SkeletonMethod parse_skeleton_method(std::string_view name) {
  if (name == "sp") return SkeletonMethod::ShortestPath;
  if (name == "som") return SkeletonMethod::Som;
  throw Error(ErrorCode::InvalidArgument, "unknown skeleton method '" + std::string(name) + "'");
}

std::string_view to_string(SkeletonMethod method) {
  return method == SkeletonMethod::ShortestPath ? "sp" : "som";
}

SkeletonResult skeletonize(const std::vector<Vec3>& points, SkeletonMethod method, const SkeletonParams& params) {
  return method == SkeletonMethod::ShortestPath ? shortest_path_skeleton(points, params) : som_skeleton(points, params);
}

}  // namespace strawkit::skel
