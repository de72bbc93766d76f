#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "strawkit/geometry.hpp"

namespace strawkit::io {

/// Annotation class codes as used by the strawberry point-cloud annotations.
enum class SemanticClass : std::uint8_t {
  Leaf = 1,
  Stem = 2,
  Berry = 3,
  Flower = 4,
  Crown = 5,
  Background = 6,
  OtherPlantPart = 7,
  ScanningTable = 8,
  EmergentLeaf = 9,
};

/// Throws Error(UnknownClassCode) outside 1..9.
SemanticClass class_from_code(long long code);
inline int class_code(SemanticClass c) { return static_cast<int>(c); }
std::string class_name(SemanticClass c);
const std::set<SemanticClass>& all_classes();

using Rgb = std::array<std::uint8_t, 3>;

struct LabeledPoint {
  Vec3 position = Vec3::Zero();
  Rgb colour{0, 0, 0};
  std::optional<SemanticClass> cls;
  std::optional<std::uint32_t> instance;
  std::optional<std::uint32_t> temporal_id;  // nominal identity only, no ordering
};

struct LabeledPointCloud {
  std::vector<LabeledPoint> points;
  std::string plant_id;
  std::optional<std::chrono::year_month_day> scan_date;

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }
  [[nodiscard]] bool has_classes() const;
  [[nodiscard]] bool has_instances() const;
  [[nodiscard]] bool has_temporal_ids() const;
  [[nodiscard]] std::vector<Vec3> positions() const;
};

struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected spatial graph. Vertices in millimetres.
struct Skeleton {
  std::vector<Vec3> vertices;
  std::vector<Edge> edges;

  [[nodiscard]] double total_length() const;
  [[nodiscard]] double edge_length(const Edge& e) const { return (vertices[e.b] - vertices[e.a]).norm(); }
};

/// Removes duplicate edges (either orientation) and returns how many were dropped.
/// Throws on self-loops or out-of-range indices.
std::size_t normalize_skeleton(Skeleton& skel);

enum class CloudFormat { Ply, XyzTable };

/// Format from file extension: .ply -> Ply, everything else -> XyzTable.
CloudFormat format_for(const std::filesystem::path& path);

struct FileKey {
  std::string plant_id;
  std::optional<std::chrono::year_month_day> date;
};
/// Best-effort parse of "<plantID>_<YYYYMMDD>[...].<ext>".
FileKey parse_file_name(const std::filesystem::path& path);
std::string format_date(const std::chrono::year_month_day& d);
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);

LabeledPointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format);
LabeledPointCloud load_point_cloud(const std::filesystem::path& path);
LabeledPointCloud parse_xyz_table(std::istream& in);

enum class PlyEncoding { Ascii, Binary };
void write_point_cloud(const std::filesystem::path& path, const LabeledPointCloud& cloud,
                       CloudFormat format, PlyEncoding encoding = PlyEncoding::Binary);

struct SkeletonLoad {
  Skeleton skeleton;
  std::size_t duplicate_edges = 0;
};
SkeletonLoad load_skeleton(const std::filesystem::path& path);
void write_skeleton(const std::filesystem::path& path, const Skeleton& skel);

/// Points whose class is in `keep`, order preserved. Throws UnlabeledCloud.
LabeledPointCloud filter_classes(const LabeledPointCloud& cloud, const std::set<SemanticClass>& keep);

/// Partition of one class's points by instance id.
std::map<std::uint32_t, LabeledPointCloud> split_instances(const LabeledPointCloud& cloud,
                                                          SemanticClass cls);

std::map<SemanticClass, std::size_t> class_histogram(const LabeledPointCloud& cloud);

struct FileReport {
  std::string file;
  bool ok = false;
  std::string error;
  std::string plant_id;
  std::optional<std::chrono::year_month_day> date;
  std::size_t points = 0;
  bool annotated = false;
  std::map<int, std::size_t> class_histogram;
  std::map<int, std::size_t> instance_counts;
};

struct ValidationReport {
  std::vector<FileReport> files;

  [[nodiscard]] std::size_t error_count() const;
  [[nodiscard]] std::size_t cloud_count() const;
  [[nodiscard]] std::size_t annotated_count() const;
  [[nodiscard]] std::string to_json() const;
};

/// Loads every point-cloud file in `dir` (sorted by name). Never throws for per-file problems.
ValidationReport validate_dataset(const std::filesystem::path& dir, unsigned threads = 1);

}  // namespace strawkit::io
