#include "strawkit/volumetrics.hpp"

#include <algorithm>
#include <cmath>

#include "strawkit/error.hpp"

namespace strawkit::volume {

double VoxelGrid::volume_mm3() const {
  return static_cast<double>(occupied.size()) * resolution * resolution * resolution;
}

const std::set<io::SemanticClass>& default_exclusions() {
  static const std::set<io::SemanticClass> s{io::SemanticClass::Background,
                                             io::SemanticClass::ScanningTable};
  return s;
}

VoxelGrid voxelize_points(const std::vector<Vec3>& points, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw Error(ErrorCode::InvalidArgument, "voxel resolution must be positive");
  if (points.empty()) throw Error(ErrorCode::EmptyAfterFilter, "no points to voxelize");

  VoxelGrid grid;
  grid.resolution = resolution;
  grid.origin = points.front();
  for (const auto& p : points) grid.origin = grid.origin.cwiseMin(p);

  grid.occupied.reserve(points.size());
  for (const auto& p : points) {
    const Vec3 rel = (p - grid.origin) / resolution;
    grid.occupied.push_back({static_cast<std::int64_t>(std::floor(rel.x())),
                             static_cast<std::int64_t>(std::floor(rel.y())),
                             static_cast<std::int64_t>(std::floor(rel.z()))});
  }
  std::sort(grid.occupied.begin(), grid.occupied.end());
  grid.occupied.erase(std::unique(grid.occupied.begin(), grid.occupied.end()), grid.occupied.end());
  return grid;
}

VoxelGrid voxelize(const io::LabeledPointCloud& cloud, double resolution,
                   const std::set<io::SemanticClass>& exclude) {
  std::vector<Vec3> kept;
  kept.reserve(cloud.size());
  for (const auto& p : cloud.points)
    if (!p.cls || !exclude.count(*p.cls)) kept.push_back(p.position);
  return voxelize_points(kept, resolution);
}

double plant_volume(const VoxelGrid& grid) { return grid.volume_mm3() / 1000.0; }

}  // namespace strawkit::volume
