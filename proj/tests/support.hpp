#pragma once

// Oracles and generators shared by the unit tests and the acceptance binary.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "strawkit/geometry.hpp"
#include "strawkit/pointcloud_io.hpp"

namespace testing {

using strawkit::Vec3;
using strawkit::io::Skeleton;

/// Exhaustive minimum over all injective row/column assignments of size min(rows, cols).
inline double brute_force_assignment(const Eigen::MatrixXd& cost) {
  const bool t = cost.rows() > cost.cols();
  const Eigen::MatrixXd m = t ? Eigen::MatrixXd(cost.transpose()) : cost;
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  std::vector<char> used(cols, 0);
  double best = std::numeric_limits<double>::infinity();
  auto dfs = [&](auto&& self, std::size_t r, double acc) -> void {
    if (r == rows) {
      best = std::min(best, acc);
      return;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      self(self, r + 1, acc + m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      used[c] = 0;
    }
  };
  if (rows == 0) return 0.0;
  dfs(dfs, 0, 0.0);
  return best;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  for (;;) {
    const Vec3 v(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const double n = v.norm();
    if (n > 0.1 && n <= 1.0) return v / n;
  }
}

/// Tree of `branches` smooth random-walk polylines, each of total length in
/// [min_len, max_len] mm; every branch after the first starts at an existing vertex.
inline Skeleton random_tree(std::mt19937_64& rng, int branches, double min_len, double max_len) {
  Skeleton s;
  s.vertices.push_back(Vec3::Zero());
  for (int b = 0; b < branches; ++b) {
    std::size_t prev = b == 0 ? 0 : static_cast<std::size_t>(rng() % s.vertices.size());
    const double target = uniform(rng, min_len, max_len);
    Vec3 dir = random_unit(rng);
    double len = 0.0;
    while (len < target) {
      const double step = std::min(uniform(rng, 0.5, 6.0), target - len);
      dir = (dir + 0.3 * random_unit(rng)).normalized();
      s.vertices.push_back(s.vertices[prev] + step * dir);
      const std::size_t cur = s.vertices.size() - 1;
      s.edges.push_back({prev, cur});
      prev = cur;
      len += step;
    }
  }
  return s;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("strawkit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testing
