#include <doctest.h>

#include <algorithm>
#include <random>

#include "strawkit/error.hpp"
#include "strawkit/volumetrics.hpp"
#include "support.hpp"

using namespace strawkit;
using namespace strawkit::io;
using namespace strawkit::volume;

namespace {

LabeledPointCloud cloud_of(const std::vector<Vec3>& pts, std::optional<SemanticClass> cls = std::nullopt) {
  LabeledPointCloud c;
  for (const auto& p : pts) c.points.push_back({p, {}, cls, {}, {}});
  return c;
}

}  // namespace

TEST_CASE("single point occupies one voxel") {
  const auto g = voxelize(cloud_of({Vec3(3.2, -1, 7)}), 1.0);
  CHECK(g.count() == 1);
  CHECK(g.volume_mm3() == 1.0);
  CHECK(plant_volume(g) == 0.001);
}

TEST_CASE("dense 50 mm cube at resolution 1 is within 10% of 125 cm3") {
  std::vector<Vec3> pts;
  for (double x = 0; x <= 50; x += 0.5)
    for (double y = 0; y <= 50; y += 0.5)
      for (double z = 0; z <= 50; z += 0.5) pts.emplace_back(x, y, z);
  const double v = plant_volume(voxelize_points(pts, 1.0));
  CHECK(std::abs(v - 125.0) / 125.0 < 0.1);
}

TEST_CASE("exclusions") {
  auto c = cloud_of({Vec3(0, 0, 0), Vec3(5, 5, 5)}, SemanticClass::Stem);
  c.points.push_back({Vec3(100, 0, 0), {}, SemanticClass::Background, {}, {}});
  c.points.push_back({Vec3(0, 100, 0), {}, SemanticClass::ScanningTable, {}, {}});
  CHECK(voxelize(c, 1.0).count() == 2);
  CHECK(voxelize(c, 1.0, {SemanticClass::Background}).count() == 3);
  CHECK(voxelize(c, 1.0, {}).count() == 4);
  const auto only_table = cloud_of({Vec3(0, 0, 0)}, SemanticClass::ScanningTable);
  try {
    voxelize(only_table, 1.0);
    FAIL("expected EmptyAfterFilter");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyAfterFilter);
  }
  try {
    voxelize(c, 0.0);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("property: integer translations keep the occupancy count") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const double res = testing::uniform(rng, 0.25, 3.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i)
      pts.emplace_back(testing::uniform(rng, -20, 20), testing::uniform(rng, -20, 20), testing::uniform(rng, 0, 30));
    const auto base = voxelize_points(pts, res).count();
    const Vec3 shift = res * Vec3(static_cast<double>(rng() % 41) - 20, static_cast<double>(rng() % 41) - 20,
                                  static_cast<double>(rng() % 41) - 20);
    std::vector<Vec3> moved;
    for (const auto& p : pts) moved.push_back(p + shift);
    CHECK(voxelize_points(moved, res).count() == base);
  }
}

TEST_CASE("occupancy is bounded by the point count and by the grid cells") {
  std::mt19937_64 rng(5);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i)
    pts.emplace_back(testing::uniform(rng, 0, 10), testing::uniform(rng, 0, 10), testing::uniform(rng, 0, 10));
  const auto fine = voxelize_points(pts, 0.01).count();
  CHECK(fine == pts.size());
  CHECK(voxelize_points(pts, 1.0).count() <= 1000);
}

TEST_CASE("corners of a 10 mm cube occupy 8 voxels") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(10.0 * (i & 1), 10.0 * ((i >> 1) & 1), 10.0 * ((i >> 2) & 1));
  const auto g = voxelize_points(pts, 1.0);
  CHECK(g.count() == 8);
  CHECK(g.volume_mm3() == 8.0);
  CHECK(std::find(g.occupied.begin(), g.occupied.end(), VoxelIndex{10, 10, 10}) != g.occupied.end());
}

TEST_CASE("1000 voxels of 1 mm make 1 cm3") {
  VoxelGrid g;
  for (std::int64_t i = 0; i < 1000; ++i) g.occupied.push_back({i, 0, 0});
  CHECK(plant_volume(g) == 1.0);
}

TEST_CASE("property: monotonic in points, bounded under halving, dense solids") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 200; ++i)
      pts.emplace_back(testing::uniform(rng, 0, 15), testing::uniform(rng, 0, 15), testing::uniform(rng, 0, 15));
    const double r = testing::uniform(rng, 0.5, 2.0);
    // The grid is anchored at the minimum, so keep it fixed while adding points.
    auto more = pts;
    for (int i = 0; i < 50; ++i)
      more.emplace_back(testing::uniform(rng, 0, 15), testing::uniform(rng, 0, 15), testing::uniform(rng, 0, 15));
    more.push_back(Vec3(0, 0, 0));
    pts.push_back(Vec3(0, 0, 0));
    CHECK(voxelize_points(more, r).count() >= voxelize_points(pts, r).count());
    CHECK(voxelize_points(pts, r / 2).count() <= 8 * voxelize_points(pts, r).count());
  }
  // Samples on [0, L) per axis. A lattice that also includes the far faces adds
  // one voxel layer, (n + 1)^3 / n^3, which exceeds 10% until L reaches 31 r.
  for (double r : {0.5, 1.0, 2.0})
    for (double cells : {20.0, 27.0, 40.0}) {
      const double length = cells * r;
      const int steps = static_cast<int>(2 * cells);
      std::vector<Vec3> solid;
      const Vec3 origin(testing::uniform(rng, -50, 50), testing::uniform(rng, -50, 50), testing::uniform(rng, 0, 50));
      for (int i = 0; i < steps; ++i)
        for (int j = 0; j < steps; ++j)
          for (int k = 0; k < steps; ++k) solid.push_back(origin + Vec3(i, j, k) * (r / 2));
      const double v = voxelize_points(solid, r).volume_mm3();
      CHECK(std::abs(v - length * length * length) / (length * length * length) < 0.1);
    }
  for (double r : {0.5, 1.0}) {
    const double length = 32.0 * r;
    std::vector<Vec3> solid;
    for (int i = 0; i <= 64; ++i)
      for (int j = 0; j <= 64; ++j)
        for (int k = 0; k <= 64; ++k) solid.emplace_back(i * r / 2, j * r / 2, k * r / 2);
    const double v = voxelize_points(solid, r).volume_mm3();
    CHECK(v == doctest::Approx(33.0 * 33.0 * 33.0 * r * r * r));
    CHECK(std::abs(v - length * length * length) / (length * length * length) < 0.1);
  }
}
