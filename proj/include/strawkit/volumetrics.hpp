#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <vector>

#include "strawkit/geometry.hpp"
#include "strawkit/pointcloud_io.hpp"

namespace strawkit::volume {

using VoxelIndex = std::array<std::int64_t, 3>;

/// Cubic voxels of edge `resolution` anchored at `origin`.
struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double resolution = 1.0;
  std::vector<VoxelIndex> occupied;  // sorted, unique

  [[nodiscard]] std::size_t count() const { return occupied.size(); }
  [[nodiscard]] double volume_mm3() const;
};

const std::set<io::SemanticClass>& default_exclusions();

/// Occupancy grid anchored at the componentwise minimum of the retained points.
/// Points without a class label are retained. Throws EmptyAfterFilter, InvalidArgument.
VoxelGrid voxelize(const io::LabeledPointCloud& cloud, double resolution,
                   const std::set<io::SemanticClass>& exclude = default_exclusions());

VoxelGrid voxelize_points(const std::vector<Vec3>& points, double resolution);

/// Occupied volume in cm^3.
double plant_volume(const VoxelGrid& grid);

}  // namespace strawkit::volume
