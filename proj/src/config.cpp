#include "strawkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "strawkit/error.hpp"
#include "strawkit/numfmt.hpp"

namespace strawkit::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (s.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, key + " = '" + value + "': " + why);
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) bad(key, value, "not a number");
  return out;
}

double positive(const std::string& key, const std::string& value) {
  const double v = number<double>(key, value);
  if (!(v > 0.0) || !std::isfinite(v)) bad(key, value, "must be positive");
  return v;
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad(key, value, "expected true or false");
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) { return to_key_values(a) == to_key_values(b); }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "subcommand", "input",         "out",          "threads",       "seed",          "resolution",
      "exclude",    "mesh-method",   "outlier-k",    "outlier-std-ratio", "subsample", "bpa-multipliers",
      "max-hole-edges", "gt-mesh",   "skeleton-method", "class",      "root",          "bin-count",
      "knn",        "som-fraction",  "som-min-nodes", "som-epochs",   "som-lr-start",  "som-lr-end",
      "som-sigma-end", "s-dense",    "t-match",      "t-line",        "unmatched-cost", "gt",
      "est",        "kind"};
  return keys;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t number_of_line = 0;
  while (std::getline(in, line)) {
    ++number_of_line;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(number_of_line) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(number_of_line) + ": empty key");
    if (kv.count(key))
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(number_of_line) + ": repeated key " + key);
    kv[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

RunConfig apply(RunConfig c, const KeyValues& kv) {
  const auto& keys = config_keys();
  for (const auto& [key, value] : kv) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    try {
      if (key == "subcommand") c.subcommand = value;
      else if (key == "input") c.inputs = split(value, ',');
      else if (key == "out") c.out = value;
      else if (key == "threads") {
        c.threads = number<unsigned>(key, value);
        if (c.threads == 0) bad(key, value, "must be at least 1");
      } else if (key == "seed") {
        c.seed = number<std::uint64_t>(key, value);
      } else if (key == "resolution") {
        c.resolution = positive(key, value);
      } else if (key == "exclude") {
        c.exclude.clear();
        for (const auto& item : split(value, ',')) {
          const int code = number<int>(key, item);
          io::class_from_code(code);
          c.exclude.push_back(code);
        }
        std::sort(c.exclude.begin(), c.exclude.end());
        c.exclude.erase(std::unique(c.exclude.begin(), c.exclude.end()), c.exclude.end());
      } else if (key == "mesh-method") {
        c.mesh_method = leaf::parse_mesh_method(value);
      } else if (key == "outlier-k") {
        c.zabawa.outlier_k = number<std::size_t>(key, value);
        if (c.zabawa.outlier_k == 0) bad(key, value, "must be at least 1");
      } else if (key == "outlier-std-ratio") {
        c.zabawa.outlier_std_ratio = positive(key, value);
      } else if (key == "subsample") {
        c.zabawa.subsample = boolean(key, value);
      } else if (key == "bpa-multipliers") {
        c.zabawa.radius_multipliers.clear();
        for (const auto& item : split(value, ',')) c.zabawa.radius_multipliers.push_back(positive(key, item));
        if (c.zabawa.radius_multipliers.empty()) bad(key, value, "needs at least one multiplier");
      } else if (key == "max-hole-edges") {
        c.zabawa.max_hole_edges = number<std::size_t>(key, value);
      } else if (key == "gt-mesh") {
        c.gt_mesh = value;
      } else if (key == "skeleton-method") {
        c.skeleton_method = skel::parse_skeleton_method(value);
      } else if (key == "class") {
        c.skeleton_class = io::class_code(io::class_from_code(number<int>(key, value)));
      } else if (key == "root") {
        if (value == "auto") {
          c.skeleton.root.reset();
        } else {
          const auto parts = split(value, ',');
          if (parts.size() != 3) bad(key, value, "expected x,y,z or auto");
          c.skeleton.root = Vec3(number<double>(key, parts[0]), number<double>(key, parts[1]),
                                 number<double>(key, parts[2]));
        }
      } else if (key == "bin-count") {
        c.skeleton.bin_count = number<int>(key, value);
      } else if (key == "knn") {
        c.skeleton.knn = number<std::size_t>(key, value);
      } else if (key == "som-fraction") {
        c.skeleton.som_fraction = positive(key, value);
      } else if (key == "som-min-nodes") {
        c.skeleton.som_min_nodes = number<std::size_t>(key, value);
      } else if (key == "som-epochs") {
        c.skeleton.som_epochs = number<int>(key, value);
      } else if (key == "som-lr-start") {
        c.skeleton.som_lr_start = positive(key, value);
      } else if (key == "som-lr-end") {
        c.skeleton.som_lr_end = positive(key, value);
      } else if (key == "som-sigma-end") {
        c.skeleton.som_sigma_end = positive(key, value);
      } else if (key == "s-dense") {
        c.match.s_dense = positive(key, value);
      } else if (key == "t-match") {
        c.match.t_match = positive(key, value);
      } else if (key == "t-line") {
        c.match.t_line = positive(key, value);
      } else if (key == "unmatched-cost") {
        c.match.unmatched_cost = positive(key, value);
      } else if (key == "gt") {
        c.gt = value;
      } else if (key == "est") {
        c.est = value;
      } else if (key == "kind") {
        c.kind = value;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidConfig) throw;
      bad(key, value, e.what());
    }
  }
  c.skeleton.rng_seed = c.seed;
  try {
    skel::validate(c.skeleton);
    match::validate(c.match);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

KeyValues to_key_values(const RunConfig& c) {
  KeyValues kv;
  auto list = [](const auto& values, auto&& fmt) {
    std::vector<std::string> items;
    for (const auto& v : values) items.push_back(fmt(v));
    return join(items, ',');
  };
  kv["subcommand"] = c.subcommand;
  kv["input"] = join(c.inputs, ',');
  kv["out"] = c.out;
  kv["threads"] = std::to_string(c.threads);
  kv["seed"] = std::to_string(c.seed);
  kv["resolution"] = format_double(c.resolution);
  kv["exclude"] = list(c.exclude, [](int v) { return std::to_string(v); });
  kv["mesh-method"] = std::string(leaf::to_string(c.mesh_method));
  kv["outlier-k"] = std::to_string(c.zabawa.outlier_k);
  kv["outlier-std-ratio"] = format_double(c.zabawa.outlier_std_ratio);
  kv["subsample"] = c.zabawa.subsample ? "true" : "false";
  kv["bpa-multipliers"] = list(c.zabawa.radius_multipliers, [](double v) { return format_double(v); });
  kv["max-hole-edges"] = std::to_string(c.zabawa.max_hole_edges);
  kv["gt-mesh"] = c.gt_mesh;
  kv["skeleton-method"] = std::string(skel::to_string(c.skeleton_method));
  kv["class"] = std::to_string(c.skeleton_class);
  kv["root"] = c.skeleton.root ? format_double(c.skeleton.root->x()) + "," + format_double(c.skeleton.root->y()) +
                                     "," + format_double(c.skeleton.root->z())
                               : "auto";
  kv["bin-count"] = std::to_string(c.skeleton.bin_count);
  kv["knn"] = std::to_string(c.skeleton.knn);
  kv["som-fraction"] = format_double(c.skeleton.som_fraction);
  kv["som-min-nodes"] = std::to_string(c.skeleton.som_min_nodes);
  kv["som-epochs"] = std::to_string(c.skeleton.som_epochs);
  kv["som-lr-start"] = format_double(c.skeleton.som_lr_start);
  kv["som-lr-end"] = format_double(c.skeleton.som_lr_end);
  kv["som-sigma-end"] = format_double(c.skeleton.som_sigma_end);
  kv["s-dense"] = format_double(c.match.s_dense);
  kv["t-match"] = format_double(c.match.t_match);
  kv["t-line"] = format_double(c.match.t_line);
  kv["unmatched-cost"] = format_double(c.match.unmatched_cost);
  kv["gt"] = c.gt;
  kv["est"] = c.est;
  kv["kind"] = c.kind;
  return kv;
}

std::string to_text(const RunConfig& c) {
  const KeyValues kv = to_key_values(c);
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + kv.at(key) + "\n";
  return out;
}

}  // namespace strawkit::cli
