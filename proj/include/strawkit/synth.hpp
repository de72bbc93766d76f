#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "strawkit/leafmesh.hpp"
#include "strawkit/pointcloud_io.hpp"

namespace strawkit::synth {

enum class Kind { StemStraight, StemCurved, StemOccluded, LeafFlat, LeafFurled, PlantMini };

/// Accepts "stem-straight", "stem-curved", "stem-occluded", "leaf-flat", "leaf-furled",
/// "plant-mini". Throws InvalidArgument.
Kind parse_kind(std::string_view name);
std::string_view to_string(Kind kind);
const std::vector<Kind>& all_kinds();

/// Hollow stem surface sampled on stratified rings: `rings` stations along the axis,
/// `per_ring` angular strata each, one jittered sample per cell.
struct StemSpec {
  std::size_t rings = 120;
  std::size_t per_ring = 52;
  double radius = 1.5;        // mm
  double length = 100.0;      // mm, arc length of the centre line
  double bend_radius = 60.0;  // mm, curved variant only
  double noise = 0.05;        // mm, radial Gaussian noise
};

struct StemSample {
  io::LabeledPointCloud cloud;
  io::Skeleton skeleton;  // centre line polyline
  double length = 0.0;    // exact centre-line length
  std::size_t candidates = 0;
  std::size_t removed = 0;  // occluded variant: samples dropped inside the hidden sector
};

StemSample stem_straight(std::uint64_t seed, const StemSpec& spec = {});
/// Circular arc in the xz plane starting vertically at the origin; length = bend_radius * angle.
StemSample stem_curved(std::uint64_t seed, const StemSpec& spec = {});
/// Straight stem with a 90 degree sector removed along its lower half.
StemSample stem_occluded(std::uint64_t seed, const StemSpec& spec = {});

struct LeafSpec {
  double a = 30.0;       // mm, semi-major axis
  double b = 15.0;       // mm, semi-minor axis
  double spacing = 0.6;  // mm, interior sample spacing
  std::size_t rim = 360;
  double roll_radius = 20.0;  // mm, furled variant only
};

struct LeafSample {
  io::LabeledPointCloud cloud;
  leaf::TriangleMesh mesh;  // reference surface mesh
  double area = 0.0;        // exact surface area, pi * a * b
};

LeafSample leaf_flat(std::uint64_t seed, const LeafSpec& spec = {});
/// The flat leaf rolled isometrically about its major axis; area is unchanged.
LeafSample leaf_furled(std::uint64_t seed, const LeafSpec& spec = {});

struct PlantScanTruth {
  std::string date;  // YYYY-MM-DD
  bool annotated = true;
  std::map<std::uint32_t, double> leaf_area;       // by temporal id
  std::map<std::uint32_t, double> petiole_length;  // by leaf temporal id
  std::map<std::uint32_t, std::uint32_t> stem_to_leaf;
};

struct PlantSeries {
  std::vector<io::LabeledPointCloud> scans;
  std::vector<PlantScanTruth> truth;
};

/// Small plant over four dates: scanning table, background, crown, petioles with flat
/// leaves at their tips. The last scan carries no annotations.
PlantSeries plant_mini(std::uint64_t seed);

/// Writes the kind's clouds plus ground truth under `dir` and returns written files, sorted.
std::vector<std::filesystem::path> write_synthetic(Kind kind, std::uint64_t seed, const std::filesystem::path& dir);

}  // namespace strawkit::synth
