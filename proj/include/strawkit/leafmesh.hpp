#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "strawkit/geometry.hpp"
#include "strawkit/pointcloud_io.hpp"

namespace strawkit::leaf {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;

  [[nodiscard]] double triangle_area(const std::array<std::size_t, 3>& t) const;
  /// Drops triangles below `min_area` mm^2. Returns the number removed.
  std::size_t remove_degenerate(double min_area = 1e-12);
};

double mesh_area(const TriangleMesh& mesh);

/// Local right-handed frame: columns of `axes` are x, y, z in descending variance order.
struct LeafFrame {
  Vec3 origin = Vec3::Zero();
  Mat3 axes = Mat3::Identity();

  [[nodiscard]] Vec3 to_local(const Vec3& p) const { return axes.transpose() * (p - origin); }
};

/// PCA frame at the centroid. x and y are sign-fixed so their largest-magnitude
/// component is positive; z = x cross y. Throws DegenerateGeometry for < 3 points or collinear input.
LeafFrame leaf_axis_frame(const std::vector<Vec3>& points);

/// Triangulates the frame-plane projection and applies the connectivity to the 3D points.
TriangleMesh delaunay_25d(const std::vector<Vec3>& points);

/// Mean distance from each point to its nearest other point.
double mean_nn_distance(const std::vector<Vec3>& points);

/// Default ball radius: twice the mean nearest-neighbour distance.
double auto_bpa_radius(const std::vector<Vec3>& points);

/// Single-radius ball pivoting. Throws DegenerateGeometry, RadiusTooSmall.
TriangleMesh ball_pivoting(const std::vector<Vec3>& points, std::optional<double> radius = std::nullopt);

struct ZabawaParams {
  std::size_t outlier_k = 16;
  double outlier_std_ratio = 2.0;
  bool subsample = true;
  std::vector<double> radius_multipliers{1.0, 2.0, 4.0};
  std::size_t max_hole_edges = 30;
};

/// Points whose mean k-NN distance is within mean + ratio * std of all such means.
std::vector<Vec3> remove_statistical_outliers(const std::vector<Vec3>& points, std::size_t k, double std_ratio);

/// One centroid per occupied voxel. The grid is anchored half a voxel below the
/// minimum corner so points on a lattice of the same spacing sit at voxel centres.
std::vector<Vec3> voxel_subsample(const std::vector<Vec3>& points, double voxel);

/// Fills boundary loops of at most `max_edges` edges by ear clipping. The longest
/// loop of each connected patch is its outer rim and is left open. Returns loops filled.
std::size_t close_holes(TriangleMesh& mesh, std::size_t max_edges);

/// Outlier removal, voxel sub-sampling, three-radius ball pivoting and hole closing.
TriangleMesh zabawa_mesh(const std::vector<Vec3>& points, const ZabawaParams& params = {});

enum class MeshMethod { Delaunay, Bpa, Zabawa };

/// Accepts "delaunay", "bpa", "zabawa". Throws InvalidArgument.
MeshMethod parse_mesh_method(std::string_view name);
std::string_view to_string(MeshMethod method);

TriangleMesh reconstruct_leaf(const std::vector<Vec3>& points, MeshMethod method,
                              const ZabawaParams& zabawa = {});

/// (1/n) sum |A*_i - A_i| / A*_i. Throws LengthMismatch, ZeroGroundTruth.
double area_mape(std::span<const double> estimates, std::span<const double> ground_truths);

/// Triangle meshes from PLY (faces as "vertex_indices" or "vertex_index" lists; polygons fanned).
TriangleMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);

}  // namespace strawkit::leaf
