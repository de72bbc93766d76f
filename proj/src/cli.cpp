#include "strawkit/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "strawkit/error.hpp"
#include "strawkit/leafmesh.hpp"
#include "strawkit/numfmt.hpp"
#include "strawkit/parallel.hpp"
#include "strawkit/pointcloud_io.hpp"
#include "strawkit/skelmatch.hpp"
#include "strawkit/skeletor.hpp"
#include "strawkit/synth.hpp"
#include "strawkit/tracking.hpp"
#include "strawkit/volumetrics.hpp"

namespace strawkit::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

// NaN and infinities have no JSON spelling.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

bool is_cloud_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" || ext == ".xyz" || ext == ".txt";
}

/// Directories expand to their cloud files (non-recursive); files pass through. Sorted, unique.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && is_cloud_file(e.path())) out.push_back(e.path());
    } else {
      out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string date_text(const io::LabeledPointCloud& c) { return c.scan_date ? io::format_date(*c.scan_date) : ""; }

std::set<io::SemanticClass> exclusion_set(const RunConfig& c) {
  std::set<io::SemanticClass> s;
  for (int code : c.exclude) s.insert(io::class_from_code(code));
  return s;
}

void require_inputs(const RunConfig& c) {
  if (c.inputs.empty()) throw Error(ErrorCode::InvalidConfig, c.subcommand + " needs at least one input");
}

// Loads every input in parallel; failures are reported and leave an empty slot.
struct Loaded {
  std::vector<fs::path> paths;
  std::vector<std::optional<io::LabeledPointCloud>> clouds;
  std::vector<std::string> errors;
};

Loaded load_all(const RunConfig& c) {
  Loaded l;
  l.paths = expand_inputs(c.inputs);
  l.clouds.resize(l.paths.size());
  l.errors.resize(l.paths.size());
  parallel_for(l.paths.size(), c.threads, [&](std::size_t i) {
    try {
      l.clouds[i] = io::load_point_cloud(l.paths[i]);
    } catch (const std::exception& e) {
      l.errors[i] = e.what();
    }
  });
  return l;
}

int report_failures(const std::vector<std::string>& failures, std::ostream& err) {
  for (const auto& f : failures) err << "error: " << f << "\n";
  if (failures.empty()) return kExitOk;
  err << failures.size() << " item(s) failed\n";
  return kExitItemFailure;
}

// --- validate ---------------------------------------------------------------

int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.inputs.size() != 1) throw Error(ErrorCode::InvalidConfig, "validate takes exactly one directory");
  const auto report = io::validate_dataset(c.inputs.front(), c.threads);
  write_file(fs::path(c.out) / "validation.json", report.to_json() + "\n");
  out << report.cloud_count() << " cloud(s), " << report.annotated_count() << " annotated, "
      << report.error_count() << " error(s)\n";
  std::vector<std::string> failures;
  for (const auto& f : report.files)
    if (!f.ok) failures.push_back(f.file + ": " + f.error);
  return report_failures(failures, err);
}

// --- volume -----------------------------------------------------------------

int cmd_volume(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_inputs(c);
  const auto exclude = exclusion_set(c);
  const Loaded l = load_all(c);
  std::vector<json> rows(l.paths.size());
  std::vector<std::string> errors = l.errors;
  parallel_for(l.paths.size(), c.threads, [&](std::size_t i) {
    json row;
    row["file"] = l.paths[i].filename().string();
    if (!l.clouds[i]) {
      row["error"] = errors[i];
      rows[i] = std::move(row);
      return;
    }
    const auto& cloud = *l.clouds[i];
    row["plant_id"] = cloud.plant_id;
    row["scan_date"] = date_text(cloud);
    try {
      const auto grid = volume::voxelize(cloud, c.resolution, exclude);
      row["voxels"] = grid.count();
      row["volume_cm3"] = volume::plant_volume(grid);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      row["error"] = errors[i];
    }
    rows[i] = std::move(row);
  });
  json arr = json::array();
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    arr.push_back(rows[i]);
    if (!errors[i].empty()) failures.push_back(l.paths[i].string() + ": " + errors[i]);
  }
  write_json(fs::path(c.out) / "volume.json", arr);
  out << arr.size() << " scan(s) measured\n";
  return report_failures(failures, err);
}

// --- leaf-area --------------------------------------------------------------

/// Leaf instances of a cloud; without instance labels all leaf points form instance 0.
std::map<std::uint32_t, std::vector<Vec3>> leaf_instances(const io::LabeledPointCloud& cloud) {
  if (!cloud.has_classes()) throw Error(ErrorCode::UnlabeledCloud, "cloud has no class labels");
  std::map<std::uint32_t, std::vector<Vec3>> out;
  const bool instances = cloud.has_instances();
  for (const auto& p : cloud.points) {
    if (p.cls != io::SemanticClass::Leaf) continue;
    if (instances && !p.instance) continue;
    out[instances ? *p.instance : 0].push_back(p.position);
  }
  return out;
}

int cmd_leaf_area(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_inputs(c);
  const Loaded l = load_all(c);
  struct Task {
    std::size_t file;
    std::uint32_t instance;
    std::vector<Vec3> points;
    double area = std::nan("");
    std::optional<double> gt_area;
    std::string error;
  };
  std::vector<Task> tasks;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < l.paths.size(); ++i) {
    if (!l.clouds[i]) {
      failures.push_back(l.paths[i].string() + ": " + l.errors[i]);
      continue;
    }
    try {
      for (auto& [id, pts] : leaf_instances(*l.clouds[i])) tasks.push_back({i, id, std::move(pts), std::nan(""), {}, {}});
    } catch (const std::exception& e) {
      failures.push_back(l.paths[i].string() + ": " + e.what());
    }
  }
  parallel_for(tasks.size(), c.threads, [&](std::size_t k) {
    Task& t = tasks[k];
    try {
      t.area = leaf::mesh_area(leaf::reconstruct_leaf(t.points, c.mesh_method, c.zabawa));
    } catch (const std::exception& e) {
      t.error = e.what();
    }
    if (c.gt_mesh.empty()) return;
    const fs::path gt = fs::path(c.gt_mesh) / (l.paths[t.file].stem().string() + "_" + std::to_string(t.instance) + ".ply");
    if (!fs::exists(gt)) return;
    try {
      t.gt_area = leaf::mesh_area(leaf::read_mesh(gt));
    } catch (const std::exception& e) {
      t.error += (t.error.empty() ? "" : "; ") + std::string("ground truth: ") + e.what();
    }
  });

  std::string csv = "plant,date,leaf_instance,method,area_mm2\n";
  json pairs = json::array();
  std::vector<double> est, gt;
  for (const Task& t : tasks) {
    const auto& cloud = *l.clouds[t.file];
    if (!t.error.empty()) failures.push_back(l.paths[t.file].string() + " leaf " + std::to_string(t.instance) + ": " + t.error);
    if (!std::isfinite(t.area)) continue;
    csv += csv_field(cloud.plant_id) + "," + date_text(cloud) + "," + std::to_string(t.instance) + "," +
           std::string(leaf::to_string(c.mesh_method)) + "," + format_double(t.area) + "\n";
    if (t.gt_area) {
      est.push_back(t.area);
      gt.push_back(*t.gt_area);
      json p;
      p["plant"] = cloud.plant_id;
      p["date"] = date_text(cloud);
      p["leaf_instance"] = t.instance;
      p["area_mm2"] = t.area;
      p["gt_area_mm2"] = *t.gt_area;
      p["ape"] = *t.gt_area > 0 ? json(std::abs(*t.gt_area - t.area) / *t.gt_area) : json(nullptr);
      pairs.push_back(std::move(p));
    }
  }
  write_file(fs::path(c.out) / "leaf_area.csv", csv);
  if (!c.gt_mesh.empty()) {
    json summary;
    summary["method"] = std::string(leaf::to_string(c.mesh_method));
    summary["pairs"] = pairs.size();
    try {
      summary["mape"] = est.empty() ? json(nullptr) : json(leaf::area_mape(est, gt));
    } catch (const std::exception& e) {
      summary["mape"] = nullptr;
      failures.push_back(std::string("mape: ") + e.what());
    }
    summary["leaves"] = std::move(pairs);
    write_json(fs::path(c.out) / "leaf_area_mape.json", summary);
  }
  out << tasks.size() << " leaf instance(s) processed\n";
  return report_failures(failures, err);
}

// --- skeletonize ------------------------------------------------------------

double longest_or_zero(const io::Skeleton& s) { return s.edges.empty() ? 0.0 : skel::longest_path(s).length; }

int cmd_skeletonize(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_inputs(c);
  const Loaded l = load_all(c);
  const auto cls = io::class_from_code(c.skeleton_class);
  struct Task {
    std::size_t file;
    std::uint32_t instance;
    std::vector<Vec3> points;
    skel::SkeletonResult result;
    std::string error;
  };
  std::vector<Task> tasks;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < l.paths.size(); ++i) {
    if (!l.clouds[i]) {
      failures.push_back(l.paths[i].string() + ": " + l.errors[i]);
      continue;
    }
    const auto& cloud = *l.clouds[i];
    try {
      if (!cloud.has_classes()) throw Error(ErrorCode::UnlabeledCloud, "cloud has no class labels");
      std::map<std::uint32_t, std::vector<Vec3>> parts;
      for (const auto& p : cloud.points)
        if (p.cls == cls) parts[p.instance.value_or(0)].push_back(p.position);
      for (auto& [id, pts] : parts) tasks.push_back({i, id, std::move(pts), {}, {}});
    } catch (const std::exception& e) {
      failures.push_back(l.paths[i].string() + ": " + e.what());
    }
  }
  const fs::path skel_dir = fs::path(c.out) / "skeletons";
  fs::create_directories(skel_dir);
  parallel_for(tasks.size(), c.threads, [&](std::size_t k) {
    Task& t = tasks[k];
    try {
      t.result = skel::skeletonize(t.points, c.skeleton_method, c.skeleton);
      io::write_skeleton(skel_dir / (l.paths[t.file].stem().string() + "_" + std::to_string(t.instance) + ".ply"),
                         t.result.skeleton);
    } catch (const std::exception& e) {
      t.error = e.what();
    }
  });
  json arr = json::array();
  for (const Task& t : tasks) {
    const auto& cloud = *l.clouds[t.file];
    json row;
    row["file"] = l.paths[t.file].stem().string() + "_" + std::to_string(t.instance) + ".ply";
    row["plant_id"] = cloud.plant_id;
    row["scan_date"] = date_text(cloud);
    row["instance"] = t.instance;
    row["points"] = t.points.size();
    if (!t.error.empty()) {
      row["error"] = t.error;
      failures.push_back(l.paths[t.file].string() + " instance " + std::to_string(t.instance) + ": " + t.error);
    } else {
      const auto& s = t.result.skeleton;
      row["vertices"] = s.vertices.size();
      row["edges"] = s.edges.size();
      row["n_end"] = skel::endpoints(s).size();
      row["n_seg"] = skel::segments(s);
      row["total_length"] = s.total_length();
      row["longest_path"] = longest_or_zero(s);
      row["warnings"] = t.result.warnings;
    }
    arr.push_back(std::move(row));
  }
  write_json(fs::path(c.out) / "skeletonize.json", arr);
  out << tasks.size() << " instance(s) skeletonized\n";
  return report_failures(failures, err);
}

// --- eval-skeleton ----------------------------------------------------------

std::set<std::string> skeleton_files(const std::string& dir) {
  std::set<std::string> names;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::InvalidConfig, "not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".ply") names.insert(e.path().filename().string());
  }
  return names;
}

int cmd_eval_skeleton(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.gt.empty() || c.est.empty()) throw Error(ErrorCode::InvalidConfig, "eval-skeleton needs --gt and --est");
  const auto gt_names = skeleton_files(c.gt);
  const auto est_names = skeleton_files(c.est);
  std::vector<std::string> pairs, missing;
  for (const auto& n : gt_names) {
    if (est_names.count(n)) pairs.push_back(n);
    else missing.push_back("gt-only " + n);
  }
  for (const auto& n : est_names)
    if (!gt_names.count(n)) missing.push_back("est-only " + n);

  std::vector<match::MatchReport> reports(pairs.size());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), c.threads, [&](std::size_t i) {
    try {
      const auto g = io::load_skeleton(fs::path(c.gt) / pairs[i]).skeleton;
      const auto e = io::load_skeleton(fs::path(c.est) / pairs[i]).skeleton;
      reports[i] = match::match_graphs(g, e, c.match);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });

  static const std::vector<std::string> columns{"precision", "recall", "f1",    "l_matched", "l_matched_est",
                                                "ape",       "n_end",  "n_seg", "tp",        "fp",
                                                "fn",        "line_positives"};
  auto values = [](const match::MatchReport& r) {
    return std::vector<double>{r.precision, r.recall, r.f1, r.l_matched, r.l_matched_est, r.length_ape,
                               static_cast<double>(r.n_end), static_cast<double>(r.n_seg),
                               static_cast<double>(r.tp), static_cast<double>(r.fp), static_cast<double>(r.fn),
                               static_cast<double>(r.line_positives)};
  };
  std::string csv = "stem";
  for (const auto& col : columns) csv += "," + col;
  csv += "\n";
  std::vector<std::vector<double>> table;
  std::vector<std::string> failures;
  json failed = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!errors[i].empty()) {
      failures.push_back(pairs[i] + ": " + errors[i]);
      failed.push_back({{"stem", pairs[i]}, {"error", errors[i]}});
      continue;
    }
    const auto v = values(reports[i]);
    csv += csv_field(pairs[i]);
    for (double x : v) csv += "," + csv_number(x);
    csv += "\n";
    table.push_back(v);
  }
  json mean = json::object(), stdev = json::object();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& row : table) {
      if (!std::isfinite(row[k])) continue;
      sum += row[k];
      ++n;
    }
    const double m = n ? sum / static_cast<double>(n) : std::nan("");
    for (const auto& row : table)
      if (std::isfinite(row[k])) sq += (row[k] - m) * (row[k] - m);
    mean[columns[k]] = number_or_null(m);
    stdev[columns[k]] = number_or_null(n ? std::sqrt(sq / static_cast<double>(n)) : std::nan(""));
  }
  json summary;
  summary["params"] = {{"s_dense", c.match.s_dense},
                       {"t_match", c.match.t_match},
                       {"t_line", c.match.t_line},
                       {"unmatched_cost", c.match.unmatched_cost}};
  summary["count"] = table.size();
  summary["mean"] = mean;
  summary["std"] = stdev;
  summary["missing"] = missing;
  summary["failed"] = failed;
  write_file(fs::path(c.out) / "eval_skeleton.csv", csv);
  write_json(fs::path(c.out) / "eval_skeleton.json", summary);
  out << table.size() << " pair(s) evaluated\n";
  for (const auto& m : missing) failures.push_back("missing pair: " + m);
  return report_failures(failures, err);
}

// --- track ------------------------------------------------------------------

int cmd_track(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_inputs(c);
  const Loaded l = load_all(c);
  std::vector<std::string> failures;
  track::TraitParams params;
  params.voxel_resolution = c.resolution;
  params.volume_exclusions = exclusion_set(c);
  params.mesh_method = c.mesh_method;
  params.zabawa = c.zabawa;
  params.skeleton_method = c.skeleton_method;
  params.skeleton = c.skeleton;

  std::vector<std::optional<track::ScanTraits>> traits(l.paths.size());
  std::vector<std::string> errors = l.errors;
  parallel_for(l.paths.size(), c.threads, [&](std::size_t i) {
    if (!l.clouds[i]) return;
    try {
      if (!l.clouds[i]->scan_date) throw Error(ErrorCode::MalformedRecord, "file name carries no scan date");
      traits[i] = track::scan_traits(*l.clouds[i], params);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<track::ScanTraits> scans;
  for (std::size_t i = 0; i < l.paths.size(); ++i) {
    if (!errors[i].empty()) {
      failures.push_back(l.paths[i].string() + ": " + errors[i]);
      continue;
    }
    for (const auto& w : traits[i]->warnings) err << "warning: " << l.paths[i].filename().string() << ": " << w << "\n";
    scans.push_back(std::move(*traits[i]));
  }

  track::TraitTimeSeries series;
  try {
    series = track::build_time_series(scans);
  } catch (const Error& e) {
    failures.push_back(e.what());
  }

  std::string csv = "plant,date,trait,class,id,value,unit,flag\n";
  for (const auto& e : series.entries) {
    csv += csv_field(series.plant_id) + "," + io::format_date(e.date) + "," + e.trait + "," +
           (e.cls ? std::to_string(*e.cls) : "") + "," + (e.id ? std::to_string(*e.id) : "") + "," +
           (e.value ? csv_number(*e.value) : "") + "," + e.unit + "," + (e.drop_flag ? "drop" : "") + "\n";
  }
  // Plot data: one array per (trait, subject), aligned with the sorted date list.
  std::vector<std::string> dates;
  for (const auto& s : scans) dates.push_back(io::format_date(s.date));
  std::sort(dates.begin(), dates.end());
  std::map<std::tuple<std::string, std::optional<int>, std::optional<std::uint32_t>>, std::vector<const track::SeriesEntry*>>
      grouped;
  for (const auto& e : series.entries) grouped[{e.trait, e.cls, e.id}].push_back(&e);
  json jseries = json::array();
  for (const auto& [key, entries] : grouped) {
    json s;
    s["trait"] = std::get<0>(key);
    s["class"] = std::get<1>(key) ? json(*std::get<1>(key)) : json(nullptr);
    s["id"] = std::get<2>(key) ? json(*std::get<2>(key)) : json(nullptr);
    s["unit"] = entries.front()->unit;
    json vals = json::array(), flags = json::array();
    for (const auto& d : dates) {
      const track::SeriesEntry* hit = nullptr;
      for (const auto* e : entries)
        if (io::format_date(e->date) == d) hit = e;
      vals.push_back(hit && hit->value ? json(*hit->value) : json(nullptr));
      flags.push_back(hit ? hit->drop_flag : false);
    }
    s["values"] = std::move(vals);
    s["drop_flags"] = std::move(flags);
    jseries.push_back(std::move(s));
  }
  json plot;
  plot["plant_id"] = series.plant_id;
  plot["dates"] = dates;
  plot["series"] = std::move(jseries);
  write_file(fs::path(c.out) / "track.csv", csv);
  write_json(fs::path(c.out) / "track.json", plot);
  out << scans.size() << " scan(s), " << series.entries.size() << " series entries\n";
  return report_failures(failures, err);
}

// --- synth ------------------------------------------------------------------

int cmd_synth(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::vector<synth::Kind> kinds;
  if (c.kind == "all") {
    kinds = synth::all_kinds();
  } else {
    try {
      kinds.push_back(synth::parse_kind(c.kind));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, e.what());
    }
  }
  std::vector<std::string> failures(kinds.size());
  std::vector<std::vector<fs::path>> written(kinds.size());
  parallel_for(kinds.size(), c.threads, [&](std::size_t i) {
    try {
      written[i] = synth::write_synthetic(kinds[i], c.seed, c.out);
    } catch (const std::exception& e) {
      failures[i] = std::string(synth::to_string(kinds[i])) + ": " + e.what();
    }
  });
  for (const auto& files : written)
    for (const auto& f : files) out << f.string() << "\n";
  failures.erase(std::remove(failures.begin(), failures.end(), std::string()), failures.end());
  return report_failures(failures, err);
}

// --- argument parsing -------------------------------------------------------

struct SubcommandSpec {
  std::string name;
  std::string help;
  std::string method_key;  // what --method maps to, empty for none
  std::string input_help;
};

const std::vector<SubcommandSpec>& subcommands() {
  static const std::vector<SubcommandSpec> specs{
      {"validate", "Check a dataset directory and report coverage", "", "dataset directory"},
      {"volume", "Voxel volume per scan", "", "scan files or directories"},
      {"leaf-area", "Leaf surface area per leaf instance", "mesh-method", "scan files or directories"},
      {"skeletonize", "Stem skeletons per instance", "skeleton-method", "scan files or directories"},
      {"eval-skeleton", "Score estimated skeletons against ground truth", "", ""},
      {"track", "Per-plant trait time series", "", "plant directory or scan files"},
      {"synth", "Write synthetic clouds with exact ground truth", "", ""},
  };
  return specs;
}

unsigned env_threads() {
  const char* v = std::getenv(kThreadsEnv);
  if (!v || !*v) return 1;
  const std::string s(v);
  unsigned n = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n == 0)
    throw Error(ErrorCode::InvalidConfig, std::string(kThreadsEnv) + " must be a positive integer");
  return n;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto& s = config.subcommand;
    if (s == "validate") return cmd_validate(config, out, err);
    if (s == "volume") return cmd_volume(config, out, err);
    if (s == "leaf-area") return cmd_leaf_area(config, out, err);
    if (s == "skeletonize") return cmd_skeletonize(config, out, err);
    if (s == "eval-skeleton") return cmd_eval_skeleton(config, out, err);
    if (s == "track") return cmd_track(config, out, err);
    if (s == "synth") return cmd_synth(config, out, err);
    throw Error(ErrorCode::InvalidConfig, "unknown subcommand '" + s + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidConfig ? kExitInvalidConfig : kExitItemFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitItemFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"strawkit: traits and skeleton evaluation for labelled plant point clouds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "strawkit 1.0.0");

  struct Buffers {
    std::map<std::string, std::string> values;
    std::vector<std::string> inputs;
    std::string method, config, save_config;
  };
  std::map<std::string, Buffers> buffers;
  std::map<std::string, CLI::App*> apps;
  for (const auto& spec : subcommands()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    auto& b = buffers[spec.name];
    apps[spec.name] = sub;
    if (!spec.input_help.empty()) sub->add_option("inputs", b.inputs, spec.input_help);
    if (!spec.method_key.empty())
      sub->add_option("--method", b.method, spec.method_key == "mesh-method" ? "delaunay | bpa | zabawa" : "sp | som");
    sub->add_option("--config", b.config, "key = value file; flags override it");
    sub->add_option("--save-config", b.save_config, "write the effective configuration here");
    for (const auto& key : config_keys()) {
      if (key == "subcommand" || key == "input") continue;
      sub->add_option("--" + key, b.values[key]);
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  CLI::App* sub = apps.at(name);
  const Buffers& b = buffers.at(name);
  const SubcommandSpec& spec = *std::find_if(subcommands().begin(), subcommands().end(),
                                             [&](const SubcommandSpec& s) { return s.name == name; });
  RunConfig config;
  try {
    config.threads = env_threads();
    if (!b.config.empty()) config = cli::apply(config, read_key_values(b.config));
    KeyValues flags;
    for (const auto& [key, value] : b.values)
      if (sub->count("--" + key) > 0) flags[key] = value;
    if (!spec.method_key.empty() && sub->count("--method") > 0) flags[spec.method_key] = b.method;
    if (!b.inputs.empty()) {
      std::string joined;
      for (std::size_t i = 0; i < b.inputs.size(); ++i) joined += (i ? "," : "") + b.inputs[i];
      flags["input"] = joined;
    }
    flags["subcommand"] = name;
    config = cli::apply(config, flags);
    if (!b.save_config.empty()) write_file(b.save_config, to_text(config));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidConfig ? kExitInvalidConfig : kExitItemFailure;
  }
  return run(config, out, err);
}

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace strawkit::cli
