#include "strawkit/pointcloud_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "strawkit/error.hpp"
#include "strawkit/numfmt.hpp"
#include "strawkit/parallel.hpp"
#include "strawkit/ply.hpp"

namespace strawkit::io {
namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + what);
}

std::optional<std::uint32_t> label_value(double v, std::size_t line_no, const char* what) {
  if (v == -1.0) return std::nullopt;
  if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0)
    malformed(line_no, std::string("invalid ") + what + " value");
  return static_cast<std::uint32_t>(v);
}

std::optional<SemanticClass> class_value(double v, std::size_t line_no) {
  if (v == -1.0) return std::nullopt;
  if (v != std::floor(v)) malformed(line_no, "non-integer class code");
  return class_from_code(static_cast<long long>(v));
}

std::uint8_t colour_value(double v, std::size_t line_no) {
  if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) malformed(line_no, "colour outside 0-255");
  return static_cast<std::uint8_t>(v);
}

void check_point(const LabeledPoint& p, std::size_t line_no) {
  if (!p.position.allFinite()) malformed(line_no, "non-finite coordinate");
  if (p.instance && !p.cls) malformed(line_no, "instance id without class label");
}

LabeledPointCloud load_ply_cloud(const std::filesystem::path& path) {
  const ply::File file = ply::read(path);
  const ply::Element* vertex = file.find("vertex");
  if (!vertex) throw Error(ErrorCode::MalformedPly, "no vertex element in " + path.string());
  const auto& xs = vertex->column("x");
  const auto& ys = vertex->column("y");
  const auto& zs = vertex->column("z");
  const bool has_rgb = vertex->has("red") && vertex->has("green") && vertex->has("blue");
  const std::vector<double>* cls = vertex->has("class") ? &vertex->column("class") : nullptr;
  const std::vector<double>* inst = vertex->has("instance") ? &vertex->column("instance") : nullptr;
  const std::vector<double>* temp =
      vertex->has("temporal_id") ? &vertex->column("temporal_id") : nullptr;

  LabeledPointCloud cloud;
  cloud.points.resize(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) {
    LabeledPoint& p = cloud.points[i];
    const std::size_t rec = i + 1;  // record number within the vertex element
    p.position = Vec3(xs[i], ys[i], zs[i]);
    if (has_rgb) {
      p.colour = {colour_value(vertex->column("red")[i], rec),
                  colour_value(vertex->column("green")[i], rec),
                  colour_value(vertex->column("blue")[i], rec)};
    }
    if (cls) p.cls = class_value((*cls)[i], rec);
    if (inst) p.instance = label_value((*inst)[i], rec, "instance");
    if (temp) p.temporal_id = label_value((*temp)[i], rec, "temporal_id");
    check_point(p, rec);
  }
  return cloud;
}

}  // namespace

SemanticClass class_from_code(long long code) {
  if (code < 1 || code > 9)
    throw Error(ErrorCode::UnknownClassCode, "class code " + std::to_string(code) + " outside 1-9");
  return static_cast<SemanticClass>(code);
}

std::string class_name(SemanticClass c) {
  switch (c) {
    case SemanticClass::Leaf: return "leaf";
    case SemanticClass::Stem: return "stem";
    case SemanticClass::Berry: return "berry";
    case SemanticClass::Flower: return "flower";
    case SemanticClass::Crown: return "crown";
    case SemanticClass::Background: return "background";
    case SemanticClass::OtherPlantPart: return "other";
    case SemanticClass::ScanningTable: return "table";
    case SemanticClass::EmergentLeaf: return "emergent_leaf";
  }
  return "unknown";
}

const std::set<SemanticClass>& all_classes() {
  static const std::set<SemanticClass> all = [] {
    std::set<SemanticClass> s;
    for (int c = 1; c <= 9; ++c) s.insert(static_cast<SemanticClass>(c));
    return s;
  }();
  return all;
}

bool LabeledPointCloud::has_classes() const {
  return std::any_of(points.begin(), points.end(), [](const auto& p) { return p.cls.has_value(); });
}

bool LabeledPointCloud::has_instances() const {
  return std::any_of(points.begin(), points.end(),
                     [](const auto& p) { return p.instance.has_value(); });
}

bool LabeledPointCloud::has_temporal_ids() const {
  return std::any_of(points.begin(), points.end(),
                     [](const auto& p) { return p.temporal_id.has_value(); });
}

std::vector<Vec3> LabeledPointCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.position);
  return out;
}

double Skeleton::total_length() const {
  double sum = 0.0;
  for (const auto& e : edges) sum += edge_length(e);
  return sum;
}

std::size_t normalize_skeleton(Skeleton& skel) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<Edge> kept;
  kept.reserve(skel.edges.size());
  for (const auto& e : skel.edges) {
    if (e.a >= skel.vertices.size() || e.b >= skel.vertices.size())
      throw Error(ErrorCode::DanglingEdgeIndex,
                  "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") with " +
                      std::to_string(skel.vertices.size()) + " vertices");
    if (e.a == e.b)
      throw Error(ErrorCode::MalformedPly, "self-loop on vertex " + std::to_string(e.a));
    if (seen.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second) kept.push_back(e);
  }
  const std::size_t dropped = skel.edges.size() - kept.size();
  skel.edges = std::move(kept);
  return dropped;
}

CloudFormat format_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? CloudFormat::Ply : CloudFormat::XyzTable;
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view text) {
  std::string digits;
  for (char c : text)
    if (c != '-') digits.push_back(c);
  if (digits.size() != 8 || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  const int y = std::stoi(digits.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(digits.substr(4, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(digits.substr(6, 2)));
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::string format_date(const std::chrono::year_month_day& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

FileKey parse_file_name(const std::filesystem::path& path) {
  static const std::regex pattern(R"(^([A-Za-z0-9]+)_(\d{8})(?:_.*)?$)");
  const std::string stem = path.stem().string();
  std::smatch m;
  FileKey key;
  if (std::regex_match(stem, m, pattern)) {
    key.date = parse_date(m[2].str());
    if (key.date) key.plant_id = m[1].str();
  }
  return key;
}

LabeledPointCloud parse_xyz_table(std::istream& in) {
  LabeledPointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    vals.clear();
    const char* p = line.data() + first;
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) malformed(line_no, "non-numeric field");
      vals.push_back(v);
      p = res.ptr;
      if (p < end && *p != ' ' && *p != '\t' && *p != ',') malformed(line_no, "non-numeric field");
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
    }
    const std::size_t n = vals.size();
    if (n != 3 && n != 6 && n != 7 && n != 8 && n != 9)
      malformed(line_no, "expected 3, 6, 7, 8 or 9 columns, got " + std::to_string(n));

    LabeledPoint pt;
    pt.position = Vec3(vals[0], vals[1], vals[2]);
    if (n >= 6)
      pt.colour = {colour_value(vals[3], line_no), colour_value(vals[4], line_no),
                   colour_value(vals[5], line_no)};
    if (n >= 7) pt.cls = class_value(vals[6], line_no);
    if (n >= 8) pt.instance = label_value(vals[7], line_no, "instance");
    if (n >= 9) pt.temporal_id = label_value(vals[8], line_no, "temporal_id");
    check_point(pt, line_no);
    cloud.points.push_back(pt);
  }
  return cloud;
}

LabeledPointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  LabeledPointCloud cloud;
  if (format == CloudFormat::Ply) {
    cloud = load_ply_cloud(path);
  } else {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    cloud = parse_xyz_table(in);
  }
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, path.string());
  const FileKey key = parse_file_name(path);
  cloud.plant_id = key.plant_id;
  cloud.scan_date = key.date;
  return cloud;
}

LabeledPointCloud load_point_cloud(const std::filesystem::path& path) {
  return load_point_cloud(path, format_for(path));
}

void write_point_cloud(const std::filesystem::path& path, const LabeledPointCloud& cloud,
                       CloudFormat format, PlyEncoding encoding) {
  const bool with_class = cloud.has_classes();
  const bool with_instance = cloud.has_instances();
  const bool with_temporal = cloud.has_temporal_ids();
  auto label = [](const auto& opt) { return opt ? static_cast<double>(*opt) : -1.0; };

  if (format == CloudFormat::XyzTable) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    const int cols = with_temporal ? 9 : with_instance ? 8 : with_class ? 7 : 6;
    for (const auto& p : cloud.points) {
      out << format_double(p.position.x()) << ' ' << format_double(p.position.y()) << ' '
          << format_double(p.position.z()) << ' ' << int(p.colour[0]) << ' ' << int(p.colour[1])
          << ' ' << int(p.colour[2]);
      if (cols >= 7) out << ' ' << (p.cls ? class_code(*p.cls) : -1);
      if (cols >= 8) out << ' ' << (p.instance ? static_cast<long long>(*p.instance) : -1LL);
      if (cols >= 9) out << ' ' << (p.temporal_id ? static_cast<long long>(*p.temporal_id) : -1LL);
      out << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
    return;
  }

  ply::File file;
  file.format = encoding == PlyEncoding::Binary ? ply::Format::BinaryLittleEndian : ply::Format::Ascii;
  ply::Element& v = file.add_element("vertex", cloud.size());
  std::vector<double> col(cloud.size());
  auto fill = [&](auto getter) {
    for (std::size_t i = 0; i < cloud.size(); ++i) col[i] = getter(cloud.points[i]);
    return col;
  };
  ply::add_column(v, "x", ply::ScalarType::Float64, fill([](const auto& p) { return p.position.x(); }));
  ply::add_column(v, "y", ply::ScalarType::Float64, fill([](const auto& p) { return p.position.y(); }));
  ply::add_column(v, "z", ply::ScalarType::Float64, fill([](const auto& p) { return p.position.z(); }));
  ply::add_column(v, "red", ply::ScalarType::UInt8, fill([](const auto& p) { return double(p.colour[0]); }));
  ply::add_column(v, "green", ply::ScalarType::UInt8, fill([](const auto& p) { return double(p.colour[1]); }));
  ply::add_column(v, "blue", ply::ScalarType::UInt8, fill([](const auto& p) { return double(p.colour[2]); }));
  if (with_class)
    ply::add_column(v, "class", ply::ScalarType::Int32, fill([](const auto& p) {
                      return p.cls ? double(class_code(*p.cls)) : -1.0;
                    }));
  if (with_instance)
    ply::add_column(v, "instance", ply::ScalarType::Int32,
                    fill([&](const auto& p) { return label(p.instance); }));
  if (with_temporal)
    ply::add_column(v, "temporal_id", ply::ScalarType::Int32,
                    fill([&](const auto& p) { return label(p.temporal_id); }));
  ply::write(path, file);
}

SkeletonLoad load_skeleton(const std::filesystem::path& path) {
  const ply::File file = ply::read(path);
  const ply::Element* vertex = file.find("vertex");
  const ply::Element* edge = file.find("edge");
  if (!vertex || !edge)
    throw Error(ErrorCode::MalformedPly, path.string() + " lacks a vertex or edge element");

  SkeletonLoad out;
  Skeleton& skel = out.skeleton;
  const auto& xs = vertex->column("x");
  const auto& ys = vertex->column("y");
  const auto& zs = vertex->column("z");
  skel.vertices.reserve(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) {
    Vec3 p(xs[i], ys[i], zs[i]);
    if (!p.allFinite()) throw Error(ErrorCode::MalformedPly, "non-finite vertex " + std::to_string(i));
    skel.vertices.push_back(p);
  }
  const auto& v1 = edge->column("vertex1");
  const auto& v2 = edge->column("vertex2");
  skel.edges.reserve(edge->count);
  for (std::size_t i = 0; i < edge->count; ++i) {
    if (v1[i] < 0 || v2[i] < 0)
      throw Error(ErrorCode::DanglingEdgeIndex, "negative index in edge " + std::to_string(i));
    skel.edges.push_back({static_cast<std::size_t>(v1[i]), static_cast<std::size_t>(v2[i])});
  }
  out.duplicate_edges = normalize_skeleton(skel);
  return out;
}

void write_skeleton(const std::filesystem::path& path, const Skeleton& skel) {
  ply::File file;
  file.format = ply::Format::Ascii;
  ply::Element& v = file.add_element("vertex", skel.vertices.size());
  std::vector<double> x, y, z;
  for (const auto& p : skel.vertices) {
    x.push_back(p.x());
    y.push_back(p.y());
    z.push_back(p.z());
  }
  ply::add_column(v, "x", ply::ScalarType::Float64, std::move(x));
  ply::add_column(v, "y", ply::ScalarType::Float64, std::move(y));
  ply::add_column(v, "z", ply::ScalarType::Float64, std::move(z));
  ply::Element& e = file.add_element("edge", skel.edges.size());
  std::vector<double> a, b;
  for (const auto& ed : skel.edges) {
    a.push_back(static_cast<double>(ed.a));
    b.push_back(static_cast<double>(ed.b));
  }
  ply::add_column(e, "vertex1", ply::ScalarType::Int32, std::move(a));
  ply::add_column(e, "vertex2", ply::ScalarType::Int32, std::move(b));
  ply::write(path, file);
}

LabeledPointCloud filter_classes(const LabeledPointCloud& cloud, const std::set<SemanticClass>& keep) {
  if (!cloud.has_classes()) throw Error(ErrorCode::UnlabeledCloud, "cloud has no class labels");
  LabeledPointCloud out;
  out.plant_id = cloud.plant_id;
  out.scan_date = cloud.scan_date;
  for (const auto& p : cloud.points)
    if (p.cls && keep.count(*p.cls)) out.points.push_back(p);
  return out;
}

std::map<std::uint32_t, LabeledPointCloud> split_instances(const LabeledPointCloud& cloud,
                                                          SemanticClass cls) {
  if (!cloud.has_classes() || !cloud.has_instances())
    throw Error(ErrorCode::UnlabeledCloud, "cloud has no instance labels");
  std::map<std::uint32_t, LabeledPointCloud> parts;
  for (const auto& p : cloud.points) {
    if (p.cls != cls) continue;
    if (!p.instance)
      throw Error(ErrorCode::UnlabeledCloud, "point of class " + class_name(cls) + " without instance id");
    auto& part = parts[*p.instance];
    if (part.empty()) {
      part.plant_id = cloud.plant_id;
      part.scan_date = cloud.scan_date;
    }
    part.points.push_back(p);
  }
  return parts;
}

std::map<SemanticClass, std::size_t> class_histogram(const LabeledPointCloud& cloud) {
  std::map<SemanticClass, std::size_t> h;
  for (const auto& p : cloud.points)
    if (p.cls) ++h[*p.cls];
  return h;
}

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(files.begin(), files.end(), [](const auto& f) { return !f.ok; }));
}

std::size_t ValidationReport::cloud_count() const { return files.size() - error_count(); }

std::size_t ValidationReport::annotated_count() const {
  return static_cast<std::size_t>(
      std::count_if(files.begin(), files.end(), [](const auto& f) { return f.ok && f.annotated; }));
}

std::string ValidationReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["clouds"] = cloud_count();
  j["annotated"] = annotated_count();
  ordered_json errors = ordered_json::array();
  ordered_json entries = ordered_json::array();
  // plant -> date -> annotated
  std::map<std::string, std::map<std::string, bool>> coverage;
  for (const auto& f : files) {
    if (!f.ok) {
      errors.push_back({{"file", f.file}, {"error", f.error}});
      continue;
    }
    ordered_json e;
    e["file"] = f.file;
    e["plant_id"] = f.plant_id;
    e["date"] = f.date ? format_date(*f.date) : std::string();
    e["points"] = f.points;
    e["annotated"] = f.annotated;
    ordered_json hist = ordered_json::object();
    for (const auto& [c, n] : f.class_histogram) hist[std::to_string(c)] = n;
    e["class_histogram"] = hist;
    ordered_json inst = ordered_json::object();
    for (const auto& [c, n] : f.instance_counts) inst[std::to_string(c)] = n;
    e["instance_counts"] = inst;
    entries.push_back(e);
    const std::string plant = f.plant_id.empty() ? std::string("unknown") : f.plant_id;
    coverage[plant][f.date ? format_date(*f.date) : f.file] |= f.annotated;
  }
  j["errors"] = errors;
  j["files"] = entries;
  ordered_json cov = ordered_json::object();
  for (const auto& [plant, dates] : coverage) {
    ordered_json row;
    std::size_t annotated = 0;
    ordered_json list = ordered_json::array();
    for (const auto& [d, a] : dates) {
      list.push_back({{"date", d}, {"annotated", a}});
      annotated += a ? 1 : 0;
    }
    row["scans"] = dates.size();
    row["annotated"] = annotated;
    row["dates"] = list;
    cov[plant] = row;
  }
  j["coverage"] = cov;
  return j.dump(2);
}

ValidationReport validate_dataset(const std::filesystem::path& dir, unsigned threads) {
  ValidationReport report;
  std::vector<std::filesystem::path> paths;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ply" || ext == ".xyz" || ext == ".txt") paths.push_back(entry.path());
  }
  if (ec) {
    FileReport f;
    f.file = dir.string();
    f.error = ec.message();
    report.files.push_back(std::move(f));
    return report;
  }
  std::sort(paths.begin(), paths.end());
  report.files.resize(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    FileReport& f = report.files[i];
    f.file = paths[i].filename().string();
    try {
      const LabeledPointCloud cloud = load_point_cloud(paths[i]);
      f.ok = true;
      f.plant_id = cloud.plant_id;
      f.date = cloud.scan_date;
      f.points = cloud.size();
      f.annotated = cloud.has_classes();
      for (const auto& [c, n] : class_histogram(cloud)) f.class_histogram[class_code(c)] = n;
      std::map<int, std::set<std::uint32_t>> inst;
      for (const auto& p : cloud.points)
        if (p.cls && p.instance) inst[class_code(*p.cls)].insert(*p.instance);
      for (const auto& [c, ids] : inst) f.instance_counts[c] = ids.size();
    } catch (const std::exception& e) {
      f.ok = false;
      f.error = e.what();
    }
  });
  return report;
}

}  // namespace strawkit::io
