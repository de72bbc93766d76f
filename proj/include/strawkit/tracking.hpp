#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "strawkit/leafmesh.hpp"
#include "strawkit/pointcloud_io.hpp"
#include "strawkit/skeletor.hpp"

namespace strawkit::track {

using io::LabeledPointCloud;
using io::SemanticClass;
using io::Skeleton;

/// Distinct instance ids per class, background and scanning table excluded.
/// Throws UnlabeledCloud when class or instance labels are missing.
std::map<SemanticClass, std::size_t> organ_counts(const LabeledPointCloud& cloud);

/// Centroid of the crown points. Throws NoCrownPoints.
Vec3 crown_anchor(const LabeledPointCloud& cloud);

struct JunctionResult {
  std::map<std::uint32_t, Vec3> junctions;
  std::vector<std::string> warnings;  // one per skipped stem
};

/// Per stem: endpoints minus the one nearest the crown; the farthest survivor from
/// the crown is the leaf junction. Stems with fewer than two endpoints are skipped
/// with a SingleEndpoint warning.
JunctionResult leaf_junction_points(const std::map<std::uint32_t, Skeleton>& stems, const Vec3& crown);

struct PetiolePair {
  std::uint32_t stem = 0;
  std::uint32_t leaf = 0;
  double cost = 0.0;  // mm
};

struct PetioleAssignment {
  std::vector<PetiolePair> pairs;  // ascending stem id
  std::vector<std::uint32_t> unassigned_stems;
  std::vector<std::uint32_t> unassigned_leaves;

  [[nodiscard]] double total_cost() const;
};

/// Minimum total Euclidean distance matching of junction points to leaf centroids.
/// Throws EmptyInput when either side is empty.
PetioleAssignment assign_petioles(const std::map<std::uint32_t, Vec3>& junctions,
                                  const std::map<std::uint32_t, Vec3>& leaves);

/// Leaf centroids keyed by temporal id (instance id when no temporal ids are present).
std::map<std::uint32_t, Vec3> leaf_centroids(const LabeledPointCloud& cloud);

struct TraitParams {
  double voxel_resolution = 1.0;
  std::set<SemanticClass> volume_exclusions{SemanticClass::Background, SemanticClass::ScanningTable};
  leaf::MeshMethod mesh_method = leaf::MeshMethod::Zabawa;
  leaf::ZabawaParams zabawa;
  skel::SkeletonMethod skeleton_method = skel::SkeletonMethod::ShortestPath;
  skel::SkeletonParams skeleton;
};

/// Measured traits of one scan. Unannotated scans carry only the point count.
struct ScanTraits {
  std::string plant_id;
  std::chrono::year_month_day date{};
  std::size_t point_count = 0;
  bool annotated = false;
  std::optional<double> volume_cm3;
  std::map<SemanticClass, std::size_t> organ_counts;
  std::map<std::uint32_t, double> leaf_area_mm2;        // by leaf temporal id
  std::map<std::uint32_t, double> petiole_length_mm;    // by assigned leaf temporal id
  std::vector<std::string> warnings;
};

/// Volume, organ counts, leaf areas and petiole lengths of one labelled scan.
/// Per-organ failures (e.g. a leaf too small to mesh) become warnings.
ScanTraits scan_traits(const LabeledPointCloud& cloud, const TraitParams& params = {});

struct SeriesEntry {
  std::chrono::year_month_day date{};
  std::string trait;           // volume, organ_count, leaf_area, petiole_length, point_count
  std::optional<int> cls;      // unset for whole-plant traits
  std::optional<std::uint32_t> id;
  std::optional<double> value; // unset: scan without annotations
  std::string unit;
  bool drop_flag = false;      // value fell by more than 20% since the previous present value

  friend bool operator==(const SeriesEntry&, const SeriesEntry&) = default;
};

struct TraitTimeSeries {
  std::string plant_id;
  std::vector<SeriesEntry> entries;  // sorted by (date, trait, class, id)

  friend bool operator==(const TraitTimeSeries&, const TraitTimeSeries&) = default;
};

inline constexpr double kDropThreshold = 0.2;

/// Sorts entries, rejects repeated (trait, subject, date) with DuplicateDate and
/// recomputes drop flags. Idempotent.
TraitTimeSeries build_time_series(const std::string& plant_id, std::vector<SeriesEntry> entries);

/// Series over scans of one plant. Unannotated scans contribute missing values for
/// every trait subject seen elsewhere. Throws MixedPlants, DuplicateDate.
TraitTimeSeries build_time_series(const std::vector<ScanTraits>& scans);

}  // namespace strawkit::track
