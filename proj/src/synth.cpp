#include "strawkit/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "strawkit/error.hpp"

namespace strawkit::synth {

namespace {

using io::LabeledPoint;
using io::SemanticClass;
constexpr double kPi = std::numbers::pi;

// Portable draws: the standard distributions are implementation-defined, the raw
// engine output is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

LabeledPoint labelled(const Vec3& pos, SemanticClass cls, std::uint32_t instance,
                      std::optional<std::uint32_t> temporal = std::nullopt) {
  static const std::map<SemanticClass, io::Rgb> colours{
      {SemanticClass::Leaf, {52, 140, 48}},       {SemanticClass::Stem, {120, 170, 60}},
      {SemanticClass::Crown, {110, 90, 40}},      {SemanticClass::Background, {90, 90, 100}},
      {SemanticClass::ScanningTable, {200, 200, 205}}};
  LabeledPoint p;
  p.position = pos;
  p.colour = colours.at(cls);
  p.cls = cls;
  p.instance = instance;
  p.temporal_id = temporal;
  return p;
}

std::chrono::year_month_day date_of(int y, unsigned m, unsigned d) {
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

enum class Shape { Straight, Curved };

// Centre line position and a right-handed frame (tangent, normal, binormal) at arc length s.
struct Frame {
  Vec3 c, t, n, b;
};

Frame centre_line(Shape shape, const StemSpec& spec, double s) {
  if (shape == Shape::Straight) return {Vec3(0, 0, s), Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
  const double r = spec.bend_radius;
  const double phi = s / r;
  return {Vec3(r * (1.0 - std::cos(phi)), 0.0, r * std::sin(phi)), Vec3(std::sin(phi), 0.0, std::cos(phi)),
          Vec3(std::cos(phi), 0.0, -std::sin(phi)), Vec3::UnitY()};
}

StemSample make_stem(Shape shape, bool occlude, std::uint64_t seed, const StemSpec& spec, const std::string& plant) {
  if (spec.rings < 2 || spec.per_ring < 4 || !(spec.radius > 0) || !(spec.length > 0))
    throw Error(ErrorCode::InvalidArgument, "invalid stem specification");
  Rng rng(seed);
  StemSample out;
  out.cloud.plant_id = plant;
  out.cloud.scan_date = date_of(2025, 1, 1);
  out.length = spec.length;
  for (std::size_t i = 0; i < spec.rings; ++i) {
    for (std::size_t k = 0; k < spec.per_ring; ++k) {
      const double s = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(spec.rings) * spec.length;
      const double alpha = (static_cast<double>(k) + rng.uniform()) / static_cast<double>(spec.per_ring) * 2.0 * kPi;
      const double r = spec.radius + spec.noise * rng.normal();
      ++out.candidates;
      // Hidden sector: the first quarter of the angular strata on the lower half of the rings.
      if (occlude && 2 * i < spec.rings && 4 * k < spec.per_ring) {
        ++out.removed;
        continue;
      }
      const Frame f = centre_line(shape, spec, s);
      const Vec3 pos = f.c + r * (std::cos(alpha) * f.n + std::sin(alpha) * f.b);
      out.cloud.points.push_back(labelled(pos, SemanticClass::Stem, 1));
    }
  }
  const std::size_t segments = shape == Shape::Straight ? 100 : 400;
  for (std::size_t j = 0; j <= segments; ++j) {
    out.skeleton.vertices.push_back(
        centre_line(shape, spec, static_cast<double>(j) / static_cast<double>(segments) * spec.length).c);
    if (j > 0) out.skeleton.edges.push_back({j - 1, j});
  }
  return out;
}

// Planar ellipse samples in its own (u, v) coordinates: jittered interior grid plus an exact rim.
std::vector<Vec2> ellipse_samples(const LeafSpec& spec, Rng& rng) {
  std::vector<Vec2> pts;
  const double h = spec.spacing;
  const double margin = 1.0 - 0.5 * h / spec.b;
  for (double x = -spec.a; x <= spec.a; x += h) {
    for (double y = -spec.b; y <= spec.b; y += h) {
      const Vec2 p(x + 0.25 * h * (2.0 * rng.uniform() - 1.0), y + 0.25 * h * (2.0 * rng.uniform() - 1.0));
      const double e = std::hypot(p.x() / spec.a, p.y() / spec.b);
      if (e < margin) pts.push_back(p);
    }
  }
  for (std::size_t k = 0; k < spec.rim; ++k) {
    const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(spec.rim);
    pts.emplace_back(spec.a * std::cos(t), spec.b * std::sin(t));
  }
  return pts;
}

// Polar reference mesh of the ellipse: centre fan plus quad rings.
leaf::TriangleMesh ellipse_mesh(const LeafSpec& spec) {
  constexpr std::size_t kRings = 60;
  const std::size_t m = spec.rim;
  leaf::TriangleMesh mesh;
  mesh.vertices.emplace_back(0, 0, 0);
  for (std::size_t j = 1; j <= kRings; ++j) {
    const double f = static_cast<double>(j) / kRings;
    for (std::size_t k = 0; k < m; ++k) {
      const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
      mesh.vertices.emplace_back(f * spec.a * std::cos(t), f * spec.b * std::sin(t), 0.0);
    }
  }
  auto at = [&](std::size_t j, std::size_t k) { return 1 + (j - 1) * m + k % m; };
  for (std::size_t k = 0; k < m; ++k) mesh.triangles.push_back({0, at(1, k), at(1, k + 1)});
  for (std::size_t j = 1; j < kRings; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      mesh.triangles.push_back({at(j, k), at(j + 1, k), at(j + 1, k + 1)});
      mesh.triangles.push_back({at(j, k), at(j + 1, k + 1), at(j, k + 1)});
    }
  }
  return mesh;
}

Vec3 roll(const Vec3& p, double radius) {
  const double phi = p.y() / radius;
  return {p.x(), radius * std::sin(phi), radius * (1.0 - std::cos(phi))};
}

LeafSample make_leaf(bool furled, std::uint64_t seed, const LeafSpec& spec, const std::string& plant) {
  if (!(spec.a > 0) || !(spec.b > 0) || !(spec.spacing > 0) || spec.rim < 8)
    throw Error(ErrorCode::InvalidArgument, "invalid leaf specification");
  Rng rng(seed);
  LeafSample out;
  out.cloud.plant_id = plant;
  out.cloud.scan_date = date_of(2025, 1, 1);
  out.area = kPi * spec.a * spec.b;
  out.mesh = ellipse_mesh(spec);
  for (const Vec2& p : ellipse_samples(spec, rng)) {
    Vec3 pos(p.x(), p.y(), 0.0);
    if (furled) pos = roll(pos, spec.roll_radius);
    out.cloud.points.push_back(labelled(pos, SemanticClass::Leaf, 1, 1));
  }
  if (furled)
    for (auto& v : out.mesh.vertices) v = roll(v, spec.roll_radius);
  return out;
}

}  // namespace

Kind parse_kind(std::string_view name) {
  for (Kind k : all_kinds())
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown synthetic kind '" + std::string(name) + "'");
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::StemStraight: return "stem-straight";
    case Kind::StemCurved: return "stem-curved";
    case Kind::StemOccluded: return "stem-occluded";
    case Kind::LeafFlat: return "leaf-flat";
    case Kind::LeafFurled: return "leaf-furled";
    case Kind::PlantMini: return "plant-mini";
  }
  return "?";
}

const std::vector<Kind>& all_kinds() {
  static const std::vector<Kind> kinds{Kind::StemStraight, Kind::StemCurved, Kind::StemOccluded,
                                       Kind::LeafFlat,     Kind::LeafFurled, Kind::PlantMini};
  return kinds;
}

StemSample stem_straight(std::uint64_t seed, const StemSpec& spec) {
  return make_stem(Shape::Straight, false, seed, spec, "straight" + std::to_string(seed));
}

StemSample stem_curved(std::uint64_t seed, const StemSpec& spec) {
  return make_stem(Shape::Curved, false, seed, spec, "curved" + std::to_string(seed));
}

StemSample stem_occluded(std::uint64_t seed, const StemSpec& spec) {
  return make_stem(Shape::Straight, true, seed, spec, "occluded" + std::to_string(seed));
}

LeafSample leaf_flat(std::uint64_t seed, const LeafSpec& spec) {
  return make_leaf(false, seed, spec, "leafflat" + std::to_string(seed));
}

LeafSample leaf_furled(std::uint64_t seed, const LeafSpec& spec) {
  return make_leaf(true, seed, spec, "leaffurled" + std::to_string(seed));
}

PlantSeries plant_mini(std::uint64_t seed) {
  Rng rng(seed);
  PlantSeries out;
  const std::string plant = "mini" + std::to_string(seed);
  const std::array<std::chrono::year_month_day, 4> dates{date_of(2025, 3, 1), date_of(2025, 3, 15),
                                                         date_of(2025, 3, 29), date_of(2025, 4, 12)};
  const std::array<std::size_t, 4> leaf_counts{3, 4, 4, 4};
  const Vec3 crown_centre(0.0, 0.0, 8.0);
  constexpr double kCrownRadius = 4.0;
  const double elevation = 50.0 * kPi / 180.0;

  for (std::size_t di = 0; di < dates.size(); ++di) {
    io::LabeledPointCloud cloud;
    cloud.plant_id = plant;
    cloud.scan_date = dates[di];
    PlantScanTruth truth;
    truth.date = io::format_date(dates[di]);
    truth.annotated = di + 1 < dates.size();

    for (double x = -70.0; x <= 70.0; x += 5.0)
      for (double y = -70.0; y <= 70.0; y += 5.0)
        cloud.points.push_back(labelled(Vec3(x, y, 0.01 * rng.normal()), SemanticClass::ScanningTable, 1));
    for (int i = 0; i < 300; ++i) {
      const Vec3 p(90.0 + 40.0 * rng.uniform(), -20.0 + 40.0 * rng.uniform(), 40.0 * rng.uniform());
      cloud.points.push_back(labelled(p, SemanticClass::Background, 1));
    }
    // Fibonacci sphere keeps the crown centroid close to its centre.
    constexpr int kCrownPoints = 500;
    for (int i = 0; i < kCrownPoints; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / kCrownPoints;
      const double r = std::sqrt(1.0 - z * z);
      const double t = i * kPi * (3.0 - std::sqrt(5.0));
      const Vec3 dir(r * std::cos(t), r * std::sin(t), z);
      cloud.points.push_back(labelled(crown_centre + kCrownRadius * dir, SemanticClass::Crown, 1));
    }

    const std::size_t n = leaf_counts[di];
    const auto stem_ids = permutation(n, rng);
    const auto leaf_ids = permutation(n, rng);
    for (std::size_t k = 0; k < n; ++k) {
      const auto temporal = static_cast<std::uint32_t>(k + 1);
      const double psi = 2.0 * kPi * static_cast<double>(k) / 4.0 + 0.3;
      const Vec3 u(std::cos(psi), std::sin(psi), 0.0);
      const Vec3 v(-std::sin(psi), std::cos(psi), 0.0);
      const Vec3 d = std::cos(elevation) * u + std::sin(elevation) * Vec3::UnitZ();
      const Vec3 start = crown_centre + (kCrownRadius + 0.5) * d;
      const double length = 25.0 + 6.0 * static_cast<double>(di) + 2.0 * static_cast<double>(k);
      const Vec3 tip = start + length * d;

      const auto stem_instance = static_cast<std::uint32_t>(stem_ids[k] + 1);
      const Vec3 e1 = v;
      const Vec3 e2 = d.cross(e1);
      const auto rings = static_cast<std::size_t>(length / 0.4);
      for (std::size_t i = 0; i <= rings; ++i) {
        for (int j = 0; j < 14; ++j) {
          const double s = (static_cast<double>(i) + 0.5 * rng.uniform()) / static_cast<double>(rings) * length;
          const double a = (j + rng.uniform()) / 14.0 * 2.0 * kPi;
          const Vec3 p = start + std::min(s, length) * d + 1.0 * (std::cos(a) * e1 + std::sin(a) * e2);
          cloud.points.push_back(labelled(p, SemanticClass::Stem, stem_instance));
        }
      }

      LeafSpec leaf;
      leaf.a = 10.0 + 2.0 * static_cast<double>(di) + static_cast<double>(k);
      leaf.b = 5.0 + static_cast<double>(di) + 0.5 * static_cast<double>(k);
      leaf.spacing = 0.8;
      leaf.rim = 120;
      const auto leaf_instance = static_cast<std::uint32_t>(leaf_ids[k] + 1);
      const Vec3 centre = tip + (leaf.a + 0.5) * u;
      for (const Vec2& q : ellipse_samples(leaf, rng))
        cloud.points.push_back(
            labelled(centre + q.x() * u + q.y() * v, SemanticClass::Leaf, leaf_instance, temporal));

      truth.leaf_area[temporal] = kPi * leaf.a * leaf.b;
      truth.petiole_length[temporal] = length;
      truth.stem_to_leaf[stem_instance] = temporal;
    }
    if (!truth.annotated) {
      for (auto& p : cloud.points) {
        p.cls.reset();
        p.instance.reset();
        p.temporal_id.reset();
      }
    }
    out.scans.push_back(std::move(cloud));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

namespace {

std::string file_stem(const io::LabeledPointCloud& cloud) {
  std::string date = io::format_date(*cloud.scan_date);
  date.erase(std::remove(date.begin(), date.end(), '-'), date.end());
  return cloud.plant_id + "_" + date;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

std::vector<std::filesystem::path> write_synthetic(Kind kind, std::uint64_t seed, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  nlohmann::ordered_json meta;
  meta["kind"] = std::string(to_string(kind));
  meta["seed"] = seed;

  auto write_stem = [&](const StemSample& s) {
    const std::string stem = file_stem(s.cloud);
    const auto cloud_path = dir / (stem + ".ply");
    const auto gt_path = dir / "gt" / (stem + "_1.ply");  // named like skeletonize output for instance 1
    std::filesystem::create_directories(gt_path.parent_path());
    io::write_point_cloud(cloud_path, s.cloud, io::CloudFormat::Ply, io::PlyEncoding::Binary);
    io::write_skeleton(gt_path, s.skeleton);
    meta["points"] = s.cloud.size();
    meta["length_mm"] = s.length;
    meta["candidates"] = s.candidates;
    meta["removed"] = s.removed;
    meta["removed_fraction"] = static_cast<double>(s.removed) / static_cast<double>(s.candidates);
    written.insert(written.end(), {cloud_path, gt_path, dir / (stem + ".json")});
    write_json(dir / (stem + ".json"), meta);
  };
  auto write_leaf = [&](const LeafSample& s) {
    const std::string stem = file_stem(s.cloud);
    const auto cloud_path = dir / (stem + ".ply");
    const auto mesh_path = dir / "gt_mesh" / (stem + "_1.ply");
    std::filesystem::create_directories(mesh_path.parent_path());
    io::write_point_cloud(cloud_path, s.cloud, io::CloudFormat::Ply, io::PlyEncoding::Binary);
    leaf::write_mesh(mesh_path, s.mesh);
    meta["points"] = s.cloud.size();
    meta["area_mm2"] = s.area;
    meta["reference_mesh_area_mm2"] = leaf::mesh_area(s.mesh);
    written.insert(written.end(), {cloud_path, mesh_path, dir / (stem + ".json")});
    write_json(dir / (stem + ".json"), meta);
  };

  switch (kind) {
    case Kind::StemStraight: write_stem(stem_straight(seed)); break;
    case Kind::StemCurved: write_stem(stem_curved(seed)); break;
    case Kind::StemOccluded: write_stem(stem_occluded(seed)); break;
    case Kind::LeafFlat: write_leaf(leaf_flat(seed)); break;
    case Kind::LeafFurled: write_leaf(leaf_furled(seed)); break;
    case Kind::PlantMini: {
      const PlantSeries series = plant_mini(seed);
      nlohmann::ordered_json scans = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < series.scans.size(); ++i) {
        const auto path = dir / (file_stem(series.scans[i]) + ".ply");
        io::write_point_cloud(path, series.scans[i], io::CloudFormat::Ply, io::PlyEncoding::Binary);
        written.push_back(path);
        const auto& t = series.truth[i];
        nlohmann::ordered_json js;
        js["date"] = t.date;
        js["annotated"] = t.annotated;
        auto by_id = [](const auto& m) {
          nlohmann::ordered_json o = nlohmann::ordered_json::object();
          for (const auto& [id, value] : m) o[std::to_string(id)] = value;
          return o;
        };
        js["leaf_area_mm2"] = by_id(t.leaf_area);
        js["petiole_length_mm"] = by_id(t.petiole_length);
        js["stem_to_leaf"] = by_id(t.stem_to_leaf);
        scans.push_back(std::move(js));
      }
      meta["plant_id"] = series.scans.front().plant_id;
      meta["scans"] = std::move(scans);
      const auto truth_path = dir / (series.scans.front().plant_id + "_truth.json");
      write_json(truth_path, meta);
      written.push_back(truth_path);
      break;
    }
  }
  std::sort(written.begin(), written.end());
  return written;
}

}  // namespace strawkit::synth
