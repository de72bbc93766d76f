#include "strawkit/tracking.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <set>
#include <tuple>

#include "strawkit/assignment.hpp"
#include "strawkit/error.hpp"
#include "strawkit/volumetrics.hpp"

namespace strawkit::track {

std::map<SemanticClass, std::size_t> organ_counts(const LabeledPointCloud& cloud) {
  if (!cloud.has_classes() || !cloud.has_instances())
    throw Error(ErrorCode::UnlabeledCloud, "organ counts need class and instance labels");
  const auto& excluded = volume::default_exclusions();
  std::map<SemanticClass, std::set<std::uint32_t>> ids;
  for (const auto& p : cloud.points) {
    if (!p.cls || !p.instance || excluded.count(*p.cls)) continue;
    ids[*p.cls].insert(*p.instance);
  }
  std::map<SemanticClass, std::size_t> out;
  for (const auto& [cls, set] : ids) out[cls] = set.size();
  return out;
}

Vec3 crown_anchor(const LabeledPointCloud& cloud) {
  Vec3 sum = Vec3::Zero();
  std::size_t n = 0;
  for (const auto& p : cloud.points) {
    if (p.cls != SemanticClass::Crown) continue;
    sum += p.position;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::NoCrownPoints, "cloud has no crown points");
  return sum / static_cast<double>(n);
}

JunctionResult leaf_junction_points(const std::map<std::uint32_t, Skeleton>& stems, const Vec3& crown) {
  JunctionResult out;
  for (const auto& [id, sk] : stems) {
    const auto ends = skel::endpoints(sk);
    if (ends.size() < 2) {
      out.warnings.push_back("SingleEndpoint: stem " + std::to_string(id) + " has " +
                             std::to_string(ends.size()) + " endpoint(s); skipped");
      continue;
    }
    auto dist = [&](std::size_t v) { return (sk.vertices[v] - crown).norm(); };
    // endpoints() is ascending, so strict comparisons keep the lowest index on ties.
    std::size_t nearest = ends.front();
    for (std::size_t v : ends)
      if (dist(v) < dist(nearest)) nearest = v;
    std::optional<std::size_t> farthest;
    for (std::size_t v : ends) {
      if (v == nearest) continue;
      if (!farthest || dist(v) > dist(*farthest)) farthest = v;
    }
    out.junctions[id] = sk.vertices[*farthest];
  }
  return out;
}

double PetioleAssignment::total_cost() const {
  double c = 0.0;
  for (const auto& p : pairs) c += p.cost;
  return c;
}

PetioleAssignment assign_petioles(const std::map<std::uint32_t, Vec3>& junctions,
                                  const std::map<std::uint32_t, Vec3>& leaves) {
  if (junctions.empty() || leaves.empty())
    throw Error(ErrorCode::EmptyInput, "petiole assignment needs stems and leaves");
  std::vector<std::uint32_t> stem_ids, leaf_ids;
  std::vector<Vec3> stem_pts, leaf_pts;
  for (const auto& [id, p] : junctions) {
    stem_ids.push_back(id);
    stem_pts.push_back(p);
  }
  for (const auto& [id, p] : leaves) {
    leaf_ids.push_back(id);
    leaf_pts.push_back(p);
  }
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(stem_pts.size()), static_cast<Eigen::Index>(leaf_pts.size()));
  for (std::size_t i = 0; i < stem_pts.size(); ++i)
    for (std::size_t j = 0; j < leaf_pts.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (stem_pts[i] - leaf_pts[j]).norm();
  const Assignment a = hungarian(cost);

  PetioleAssignment out;
  std::vector<char> leaf_used(leaf_ids.size(), 0);
  for (std::size_t i = 0; i < stem_ids.size(); ++i) {
    const std::size_t j = a.row_to_col[i];
    if (j == kUnassigned) {
      out.unassigned_stems.push_back(stem_ids[i]);
      continue;
    }
    leaf_used[j] = 1;
    out.pairs.push_back({stem_ids[i], leaf_ids[j], cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  }
  for (std::size_t j = 0; j < leaf_ids.size(); ++j)
    if (!leaf_used[j]) out.unassigned_leaves.push_back(leaf_ids[j]);
  return out;
}

namespace {

std::map<std::uint32_t, std::vector<Vec3>> leaf_points(const LabeledPointCloud& cloud) {
  const bool temporal = cloud.has_temporal_ids();
  std::map<std::uint32_t, std::vector<Vec3>> out;
  for (const auto& p : cloud.points) {
    if (p.cls != SemanticClass::Leaf) continue;
    const auto id = temporal ? p.temporal_id : p.instance;
    if (id) out[*id].push_back(p.position);
  }
  return out;
}

}  // namespace

std::map<std::uint32_t, Vec3> leaf_centroids(const LabeledPointCloud& cloud) {
  std::map<std::uint32_t, Vec3> out;
  for (const auto& [id, pts] : leaf_points(cloud)) out[id] = centroid(pts);
  return out;
}

ScanTraits scan_traits(const LabeledPointCloud& cloud, const TraitParams& params) {
  ScanTraits t;
  t.plant_id = cloud.plant_id;
  if (cloud.scan_date) t.date = *cloud.scan_date;
  t.point_count = cloud.size();
  t.annotated = cloud.has_classes();
  if (!t.annotated) return t;

  try {
    t.volume_cm3 = volume::plant_volume(volume::voxelize(cloud, params.voxel_resolution, params.volume_exclusions));
  } catch (const Error& e) {
    t.warnings.push_back(std::string("volume: ") + e.what());
  }
  if (cloud.has_instances()) t.organ_counts = organ_counts(cloud);

  const auto leaves = leaf_points(cloud);
  for (const auto& [id, pts] : leaves) {
    try {
      t.leaf_area_mm2[id] = leaf::mesh_area(leaf::reconstruct_leaf(pts, params.mesh_method, params.zabawa));
    } catch (const Error& e) {
      t.warnings.push_back("leaf " + std::to_string(id) + ": " + e.what());
    }
  }

  if (!cloud.has_instances()) return t;
  std::optional<Vec3> crown;
  try {
    crown = crown_anchor(cloud);
  } catch (const Error& e) {
    t.warnings.push_back(std::string("petioles: ") + e.what());
    return t;
  }
  std::map<std::uint32_t, Skeleton> stems;
  for (const auto& [id, part] : io::split_instances(cloud, SemanticClass::Stem)) {
    try {
      auto result = skel::skeletonize(part.positions(), params.skeleton_method, params.skeleton);
      for (auto& w : result.warnings) t.warnings.push_back("stem " + std::to_string(id) + ": " + w);
      stems[id] = std::move(result.skeleton);
    } catch (const Error& e) {
      t.warnings.push_back("stem " + std::to_string(id) + ": " + e.what());
    }
  }
  auto junctions = leaf_junction_points(stems, *crown);
  for (auto& w : junctions.warnings) t.warnings.push_back(std::move(w));
  const auto centroids = leaf_centroids(cloud);
  if (junctions.junctions.empty() || centroids.empty()) return t;
  const auto assignment = assign_petioles(junctions.junctions, centroids);
  for (const auto& pair : assignment.pairs)
    t.petiole_length_mm[pair.leaf] = skel::longest_path(stems.at(pair.stem)).length;
  for (auto s : assignment.unassigned_stems)
    t.warnings.push_back("stem " + std::to_string(s) + ": no leaf left to assign");
  return t;
}

namespace {

auto subject_key(const SeriesEntry& e) { return std::tie(e.trait, e.cls, e.id); }

}  // namespace

TraitTimeSeries build_time_series(const std::string& plant_id, std::vector<SeriesEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const SeriesEntry& a, const SeriesEntry& b) {
    return std::tie(a.date, a.trait, a.cls, a.id) < std::tie(b.date, b.trait, b.cls, b.id);
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].date == entries[i - 1].date && subject_key(entries[i]) == subject_key(entries[i - 1]))
      throw Error(ErrorCode::DuplicateDate,
                  "repeated " + entries[i].trait + " entry on " + io::format_date(entries[i].date));
  }
  // Entries are date-sorted, so one pass sees each subject's values in time order.
  std::map<std::tuple<std::string, std::optional<int>, std::optional<std::uint32_t>>, double> last;
  for (auto& e : entries) {
    e.drop_flag = false;
    if (!e.value) continue;
    const auto key = std::make_tuple(e.trait, e.cls, e.id);
    auto it = last.find(key);
    if (it != last.end() && it->second > 0.0 && (it->second - *e.value) / it->second > kDropThreshold)
      e.drop_flag = true;
    last[key] = *e.value;
  }
  return {plant_id, std::move(entries)};
}

TraitTimeSeries build_time_series(const std::vector<ScanTraits>& scans) {
  if (scans.empty()) return {};
  const std::string& plant = scans.front().plant_id;
  std::set<std::chrono::year_month_day> dates;
  for (const auto& s : scans) {
    if (s.plant_id != plant)
      throw Error(ErrorCode::MixedPlants, "scans of plants '" + plant + "' and '" + s.plant_id + "' mixed");
    if (!dates.insert(s.date).second)
      throw Error(ErrorCode::DuplicateDate, "two scans dated " + io::format_date(s.date));
  }

  std::vector<SeriesEntry> entries;
  using Subject = std::tuple<std::string, std::optional<int>, std::optional<std::uint32_t>, std::string>;
  std::set<Subject> subjects;
  auto add = [&](const ScanTraits& s, std::string trait, std::optional<int> cls, std::optional<std::uint32_t> id,
                 double value, std::string unit) {
    subjects.insert({trait, cls, id, unit});
    entries.push_back({s.date, std::move(trait), cls, id, value, std::move(unit), false});
  };
  for (const auto& s : scans) {
    entries.push_back({s.date, "point_count", std::nullopt, std::nullopt, static_cast<double>(s.point_count),
                       "points", false});
    if (!s.annotated) continue;
    if (s.volume_cm3) add(s, "volume", std::nullopt, std::nullopt, *s.volume_cm3, "cm3");
    for (const auto& [cls, n] : s.organ_counts)
      add(s, "organ_count", io::class_code(cls), std::nullopt, static_cast<double>(n), "count");
    for (const auto& [id, a] : s.leaf_area_mm2) add(s, "leaf_area", io::class_code(SemanticClass::Leaf), id, a, "mm2");
    for (const auto& [id, l] : s.petiole_length_mm)
      add(s, "petiole_length", io::class_code(SemanticClass::Stem), id, l, "mm");
  }
  for (const auto& s : scans) {
    if (s.annotated) continue;
    for (const auto& [trait, cls, id, unit] : subjects)
      entries.push_back({s.date, trait, cls, id, std::nullopt, unit, false});
  }
  return build_time_series(plant, std::move(entries));
}

}  // namespace strawkit::track
