#include "strawkit/leafmesh.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "strawkit/ball_pivoting.hpp"
#include "strawkit/delaunay.hpp"
#include "strawkit/error.hpp"
#include "strawkit/kdtree.hpp"
#include "strawkit/ply.hpp"

namespace strawkit::leaf {
namespace {

void fix_sign(Vec3& axis) {
  int idx = 0;
  axis.cwiseAbs().maxCoeff(&idx);
  if (axis[idx] < 0) axis = -axis;
}

TriangleMesh to_mesh(const std::vector<Vec3>& points, const std::vector<std::array<std::size_t, 3>>& tris) {
  TriangleMesh mesh;
  mesh.vertices = points;
  mesh.triangles = tris;
  mesh.remove_degenerate();
  return mesh;
}

}  // namespace

double TriangleMesh::triangle_area(const std::array<std::size_t, 3>& t) const {
  const Vec3& a = vertices[t[0]];
  return 0.5 * (vertices[t[1]] - a).cross(vertices[t[2]] - a).norm();
}

std::size_t TriangleMesh::remove_degenerate(double min_area) {
  const std::size_t before = triangles.size();
  std::erase_if(triangles, [&](const auto& t) {
    return t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || !(triangle_area(t) >= min_area);
  });
  return before - triangles.size();
}

double mesh_area(const TriangleMesh& mesh) {
  double sum = 0.0;
  for (const auto& t : mesh.triangles) sum += mesh.triangle_area(t);
  return sum;
}

LeafFrame leaf_axis_frame(const std::vector<Vec3>& points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "leaf frame needs at least 3 points");
  LeafFrame frame;
  frame.origin = centroid(points);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - frame.origin;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 ev = es.eigenvalues();  // ascending
  if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2])
    throw Error(ErrorCode::DegenerateGeometry, "points are collinear or coincident");
  Vec3 x = es.eigenvectors().col(2).normalized();
  Vec3 y = es.eigenvectors().col(1);
  y = (y - x * x.dot(y)).normalized();
  fix_sign(x);
  fix_sign(y);
  frame.axes.col(0) = x;
  frame.axes.col(1) = y;
  frame.axes.col(2) = x.cross(y);
  return frame;
}

TriangleMesh delaunay_25d(const std::vector<Vec3>& points) {
  const LeafFrame frame = leaf_axis_frame(points);
  const std::size_t n = points.size();
  std::vector<Vec2> uv(n);
  Vec2 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 l = frame.to_local(points[i]);
    uv[i] = Vec2(l.x(), l.y());
    lo = lo.cwiseMin(uv[i]);
    hi = hi.cwiseMax(uv[i]);
  }

  // Jitter coincident projections apart; the offset is far below any area effect.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(uv[a].x(), uv[a].y(), a) < std::tie(uv[b].x(), uv[b].y(), b);
  });
  const double eps = 1e-9 * (hi - lo).norm();
  for (std::size_t i = 1, run = 0; i < n; ++i) {
    if (uv[order[i]] == uv[order[i - 1 - run]]) {
      ++run;
      const double angle = 2.399963229728653 * static_cast<double>(run);
      uv[order[i]] += eps * Vec2(std::cos(angle), std::sin(angle));
    } else {
      run = 0;
    }
  }
  return to_mesh(points, delaunay_2d(uv));
}

double mean_nn_distance(const std::vector<Vec3>& points) {
  if (points.size() < 2) return 0.0;
  const KdTree tree(points);
  double sum = 0.0;
  for (const auto& p : points) {
    const auto nn = tree.knn(p, 2);
    sum += nn.back().distance;
  }
  return sum / static_cast<double>(points.size());
}

double auto_bpa_radius(const std::vector<Vec3>& points) { return 2.0 * mean_nn_distance(points); }

TriangleMesh ball_pivoting(const std::vector<Vec3>& points, std::optional<double> radius) {
  const LeafFrame frame = leaf_axis_frame(points);
  const double r = radius ? *radius : auto_bpa_radius(points);
  if (!(r > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "cannot derive a ball radius");
  BallPivoter bpa(points, estimate_normals(points, 10, frame.axes.col(2)));
  bpa.run(r);
  TriangleMesh mesh = to_mesh(points, bpa.triangles());
  if (mesh.triangles.empty())
    throw Error(ErrorCode::RadiusTooSmall, "no triangle for ball radius " + std::to_string(r));
  return mesh;
}

std::vector<Vec3> remove_statistical_outliers(const std::vector<Vec3>& points, std::size_t k,
                                              double std_ratio) {
  const std::size_t n = points.size();
  if (n < 3 || k == 0) return points;
  const std::size_t kk = std::min(k, n - 1);
  const KdTree tree(points);
  std::vector<double> mean_d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = tree.knn(points[i], kk + 1);
    double s = 0.0;
    for (std::size_t j = 1; j < nbrs.size(); ++j) s += nbrs[j].distance;
    mean_d[i] = s / static_cast<double>(nbrs.size() - 1);
  }
  const double mean = std::accumulate(mean_d.begin(), mean_d.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double d : mean_d) var += (d - mean) * (d - mean);
  const double threshold = mean + std_ratio * std::sqrt(var / static_cast<double>(n));
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (mean_d[i] <= threshold) out.push_back(points[i]);
  return out;
}

std::vector<Vec3> voxel_subsample(const std::vector<Vec3>& points, double voxel) {
  if (points.empty() || !(voxel > 0.0)) return points;
  Vec3 origin = points.front();
  for (const auto& p : points) origin = origin.cwiseMin(p);
  origin.array() -= 0.5 * voxel;
  std::map<std::array<long long, 3>, std::pair<Vec3, std::size_t>> cells;
  for (const auto& p : points) {
    const Vec3 r = (p - origin) / voxel;
    auto& cell = cells[{static_cast<long long>(std::floor(r.x())), static_cast<long long>(std::floor(r.y())),
                        static_cast<long long>(std::floor(r.z()))}];
    if (cell.second == 0) cell.first = Vec3::Zero();
    cell.first += p;
    ++cell.second;
  }
  std::vector<Vec3> out;
  out.reserve(cells.size());
  for (const auto& [key, cell] : cells) out.push_back(cell.first / static_cast<double>(cell.second));
  return out;
}

namespace {

// Ear clipping of a simple polygon given in 3D; returns index triples into `loop`.
std::vector<std::array<std::size_t, 3>> ear_clip(const std::vector<Vec3>& loop) {
  const std::size_t n = loop.size();
  std::vector<std::array<std::size_t, 3>> out;
  if (n < 3) return out;
  Vec3 normal = Vec3::Zero();  // Newell
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % n];
    normal += Vec3((a.y() - b.y()) * (a.z() + b.z()), (a.z() - b.z()) * (a.x() + b.x()),
                   (a.x() - b.x()) * (a.y() + b.y()));
  }
  if (normal.norm() == 0.0) normal = Vec3::UnitZ();
  normal.normalize();
  Vec3 e1 = normal.unitOrthogonal();
  const Vec3 e2 = normal.cross(e1);
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = Vec2(loop[i].dot(e1), loop[i].dot(e2));

  auto cross = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  };
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (idx.size() > 3) {
    const std::size_t m = idx.size();
    std::size_t ear = m;
    for (std::size_t i = 0; i < m && ear == m; ++i) {
      const std::size_t a = idx[(i + m - 1) % m], b = idx[i], c = idx[(i + 1) % m];
      if (cross(p[a], p[b], p[c]) <= 0.0) continue;
      bool inside = false;
      for (std::size_t j : idx) {
        if (j == a || j == b || j == c) continue;
        if (cross(p[a], p[b], p[j]) >= 0 && cross(p[b], p[c], p[j]) >= 0 && cross(p[c], p[a], p[j]) >= 0) {
          inside = true;
          break;
        }
      }
      if (!inside) ear = i;
    }
    if (ear == m) ear = 0;  // no clean ear (non-simple projection): clip anyway
    out.push_back({idx[(ear + m - 1) % m], idx[ear], idx[(ear + 1) % m]});
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(ear));
  }
  out.push_back({idx[0], idx[1], idx[2]});
  return out;
}

}  // namespace

std::size_t close_holes(TriangleMesh& mesh, std::size_t max_edges) {
  std::map<std::pair<std::size_t, std::size_t>, int> count;
  for (const auto& t : mesh.triangles)
    for (int c = 0; c < 3; ++c) {
      const std::size_t a = t[c], b = t[(c + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  std::map<std::size_t, std::vector<std::size_t>> outgoing;
  std::vector<std::pair<std::size_t, std::size_t>> boundary;
  for (const auto& t : mesh.triangles)
    for (int c = 0; c < 3; ++c) {
      const std::size_t a = t[c], b = t[(c + 1) % 3];
      if (count[{std::min(a, b), std::max(a, b)}] == 1) {
        outgoing[a].push_back(b);
        boundary.push_back({a, b});
      }
    }
  for (auto& [v, targets] : outgoing) std::sort(targets.begin(), targets.end());
  std::sort(boundary.begin(), boundary.end());

  // Trace every closed boundary loop first; the longest loop of each connected
  // patch is its outer rim and is never treated as a hole.
  std::set<std::pair<std::size_t, std::size_t>> visited;
  std::vector<std::vector<std::size_t>> loops;
  for (const auto& [a0, b0] : boundary) {
    if (visited.count({a0, b0})) continue;
    visited.insert({a0, b0});
    std::vector<std::size_t> loop{a0};
    std::size_t cur = b0;
    bool closed = false;
    while (true) {
      if (cur == a0) {
        closed = true;
        break;
      }
      if (std::find(loop.begin(), loop.end(), cur) != loop.end()) break;
      loop.push_back(cur);
      std::size_t nxt = SIZE_MAX;
      for (std::size_t t : outgoing[cur])
        if (!visited.count({cur, t})) {
          nxt = t;
          break;
        }
      if (nxt == SIZE_MAX) break;
      visited.insert({cur, nxt});
      cur = nxt;
    }
    if (closed && loop.size() >= 3) loops.push_back(std::move(loop));
  }

  std::vector<std::size_t> parent(mesh.vertices.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& t : mesh.triangles) {
    parent[find(t[1])] = find(t[0]);
    parent[find(t[2])] = find(t[0]);
  }
  auto perimeter = [&](const std::vector<std::size_t>& loop) {
    double len = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
      len += (mesh.vertices[loop[(i + 1) % loop.size()]] - mesh.vertices[loop[i]]).norm();
    return len;
  };
  std::map<std::size_t, std::size_t> outer;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const std::size_t comp = find(loops[i].front());
    auto it = outer.find(comp);
    if (it == outer.end() || perimeter(loops[i]) > perimeter(loops[it->second])) outer[comp] = i;
  }

  std::size_t filled = 0;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    std::vector<std::size_t> loop = loops[i];
    if (outer[find(loop.front())] == i || loop.size() > max_edges) continue;
    // Boundary edges keep the mesh on their left; the patch runs the loop backwards.
    std::reverse(loop.begin(), loop.end());
    std::vector<Vec3> pts;
    for (std::size_t v : loop) pts.push_back(mesh.vertices[v]);
    for (const auto& t : ear_clip(pts)) mesh.triangles.push_back({loop[t[0]], loop[t[1]], loop[t[2]]});
    ++filled;
  }
  return filled;
}

TriangleMesh zabawa_mesh(const std::vector<Vec3>& points, const ZabawaParams& params) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "mesh needs at least 3 points");
  std::vector<Vec3> pts = remove_statistical_outliers(points, params.outlier_k, params.outlier_std_ratio);
  if (params.subsample) pts = voxel_subsample(pts, mean_nn_distance(pts));
  const LeafFrame frame = leaf_axis_frame(pts);
  const double spacing = mean_nn_distance(pts);
  if (!(spacing > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "zero point spacing");

  BallPivoter bpa(pts, estimate_normals(pts, 10, frame.axes.col(2)));
  for (double m : params.radius_multipliers) bpa.run(m * spacing);
  TriangleMesh mesh = to_mesh(pts, bpa.triangles());
  close_holes(mesh, params.max_hole_edges);
  mesh.remove_degenerate();
  return mesh;
}

double area_mape(std::span<const double> estimates, std::span<const double> ground_truths) {
  if (estimates.size() != ground_truths.size() || estimates.empty())
    throw Error(ErrorCode::LengthMismatch, "estimate and ground-truth lists differ or are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!(ground_truths[i] > 0.0))
      throw Error(ErrorCode::ZeroGroundTruth, "ground-truth area " + std::to_string(i) + " is not positive");
    sum += std::abs(ground_truths[i] - estimates[i]) / ground_truths[i];
  }
  return sum / static_cast<double>(estimates.size());
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  const ply::File file = ply::read(path);
  const ply::Element* vertex = file.find("vertex");
  const ply::Element* face = file.find("face");
  if (!vertex || !face) throw Error(ErrorCode::MalformedPly, path.string() + " lacks vertex or face element");
  TriangleMesh mesh;
  const auto& xs = vertex->column("x");
  const auto& ys = vertex->column("y");
  const auto& zs = vertex->column("z");
  for (std::size_t i = 0; i < vertex->count; ++i) mesh.vertices.emplace_back(xs[i], ys[i], zs[i]);
  const auto& lists = face->has("vertex_indices") ? face->list("vertex_indices") : face->list("vertex_index");
  for (const auto& poly : lists) {
    for (double v : poly)
      if (v < 0 || v >= static_cast<double>(mesh.vertices.size()))
        throw Error(ErrorCode::DanglingEdgeIndex, "face index out of range in " + path.string());
    for (std::size_t k = 2; k < poly.size(); ++k)
      mesh.triangles.push_back({static_cast<std::size_t>(poly[0]), static_cast<std::size_t>(poly[k - 1]),
                                static_cast<std::size_t>(poly[k])});
  }
  return mesh;
}

void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh) {
  ply::File file;
  file.format = ply::Format::BinaryLittleEndian;
  ply::Element& v = file.add_element("vertex", mesh.vertices.size());
  std::vector<double> x, y, z;
  for (const auto& p : mesh.vertices) {
    x.push_back(p.x());
    y.push_back(p.y());
    z.push_back(p.z());
  }
  ply::add_column(v, "x", ply::ScalarType::Float64, std::move(x));
  ply::add_column(v, "y", ply::ScalarType::Float64, std::move(y));
  ply::add_column(v, "z", ply::ScalarType::Float64, std::move(z));
  ply::Element& f = file.add_element("face", mesh.triangles.size());
  std::vector<std::vector<double>> faces;
  faces.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles)
    faces.push_back({static_cast<double>(t[0]), static_cast<double>(t[1]), static_cast<double>(t[2])});
  ply::add_list(f, "vertex_indices", ply::ScalarType::UInt8, ply::ScalarType::Int32, std::move(faces));
  ply::write(path, file);
}

MeshMethod parse_mesh_method(std::string_view name) {
  if (name == "delaunay") return MeshMethod::Delaunay;
  if (name == "bpa") return MeshMethod::Bpa;
  if (name == "zabawa") return MeshMethod::Zabawa;
  throw Error(ErrorCode::InvalidArgument, "unknown mesh method '" + std::string(name) + "'");
}

std::string_view to_string(MeshMethod method) {
  switch (method) {
    case MeshMethod::Delaunay: return "delaunay";
    case MeshMethod::Bpa: return "bpa";
    case MeshMethod::Zabawa: return "zabawa";
  }
  return "?";
}

TriangleMesh reconstruct_leaf(const std::vector<Vec3>& points, MeshMethod method, const ZabawaParams& zabawa) {
  switch (method) {
    case MeshMethod::Delaunay: return delaunay_25d(points);
    case MeshMethod::Bpa: return ball_pivoting(points);
    case MeshMethod::Zabawa: return zabawa_mesh(points, zabawa);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown mesh method");
}

}  // namespace strawkit::leaf
