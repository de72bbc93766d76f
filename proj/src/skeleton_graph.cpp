#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "strawkit/error.hpp"
#include "strawkit/skeletor.hpp"

namespace strawkit::skel {

Adjacency adjacency(const Skeleton& skel) {
  Adjacency adj(skel.vertices.size());
  for (const auto& e : skel.edges) {
    const double w = skel.edge_length(e);
    adj[e.a].push_back({e.b, w});
    adj[e.b].push_back({e.a, w});
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

ShortestPaths dijkstra(const Adjacency& adj, std::size_t source) {
  const std::size_t n = adj.size();
  ShortestPaths sp{std::vector<double>(n, std::numeric_limits<double>::infinity()),
                   std::vector<std::size_t>(n, SIZE_MAX)};
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  sp.distance[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > sp.distance[u]) continue;
    for (const auto& [v, w] : adj[u]) {
      const double nd = d + w;
      if (nd < sp.distance[v] || (nd == sp.distance[v] && u < sp.predecessor[v] && v != source)) {
        const bool improved = nd < sp.distance[v];
        sp.distance[v] = nd;
        sp.predecessor[v] = u;
        if (improved) pq.push({nd, v});
      }
    }
  }
  return sp;
}

std::vector<std::size_t> endpoints(const Skeleton& skel) {
  std::vector<std::size_t> degree(skel.vertices.size(), 0);
  for (const auto& e : skel.edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < degree.size(); ++v)
    if (degree[v] == 1) out.push_back(v);
  return out;
}

std::vector<std::size_t> component_labels(const Skeleton& skel) {
  const std::size_t n = skel.vertices.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : skel.edges) {
    const std::size_t a = find(e.a), b = find(e.b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> label(n, SIZE_MAX), root_label(n, SIZE_MAX);
  std::size_t next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = find(v);
    if (root_label[r] == SIZE_MAX) root_label[r] = next++;
    label[v] = root_label[r];
  }
  return label;
}

std::size_t segments(const Skeleton& skel) {
  const auto labels = component_labels(skel);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

LongestPath longest_path(const Skeleton& skel) {
  if (skel.edges.empty()) throw Error(ErrorCode::NoEdges, "skeleton has no edges");
  const Adjacency adj = adjacency(skel);
  const auto labels = component_labels(skel);
  const std::size_t ncomp = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> comp_vertices(ncomp, 0), comp_edges(ncomp, 0);
  for (std::size_t v = 0; v < labels.size(); ++v) ++comp_vertices[labels[v]];
  for (const auto& e : skel.edges) ++comp_edges[labels[e.a]];

  // In a tree every diameter ends at leaves, so only leaves need to be sources.
  std::vector<std::size_t> sources;
  for (std::size_t v = 0; v < adj.size(); ++v) {
    const bool tree = comp_edges[labels[v]] + 1 == comp_vertices[labels[v]];
    if (!tree || adj[v].size() <= 1) sources.push_back(v);
  }

  double best = -1.0;
  std::size_t best_a = 0, best_b = 0;
  std::vector<std::size_t> best_pred;
  for (std::size_t s : sources) {
    if (adj[s].empty()) continue;
    const auto sp = dijkstra(adj, s);
    for (std::size_t t = s + 1; t < adj.size(); ++t) {
      const double d = sp.distance[t];
      if (!std::isfinite(d)) continue;
      if (d > best) {  // sources ascend, so equal lengths keep the smaller pair
        best = d;
        best_a = s;
        best_b = t;
        best_pred = sp.predecessor;
      }
    }
  }
  LongestPath out;
  out.length = best;
  for (std::size_t v = best_b; v != SIZE_MAX; v = best_pred[v]) {
    out.path.push_back(v);
    if (v == best_a) break;
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

}  // namespace strawkit::skel
