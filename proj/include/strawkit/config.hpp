#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "strawkit/leafmesh.hpp"
#include "strawkit/skelmatch.hpp"
#include "strawkit/skeletor.hpp"

namespace strawkit::cli {

/// Every parameter of a run. Keys of the text form are the long CLI flag names.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string out = ".";
  unsigned threads = 1;
  std::uint64_t seed = 7;

  double resolution = 1.0;
  std::vector<int> exclude{6, 8};

  leaf::MeshMethod mesh_method = leaf::MeshMethod::Zabawa;
  leaf::ZabawaParams zabawa;
  std::string gt_mesh;

  skel::SkeletonMethod skeleton_method = skel::SkeletonMethod::ShortestPath;
  int skeleton_class = 2;
  skel::SkeletonParams skeleton;  // rng_seed follows `seed`

  match::MatchParams match;
  std::string gt;
  std::string est;

  std::string kind = "all";

  friend bool operator==(const RunConfig&, const RunConfig&);
};

using KeyValues = std::map<std::string, std::string>;

/// Text form: one `key = value` per line, `#` comments, blank lines ignored.
/// Throws InvalidConfig on malformed lines.
KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies the keys to `base`; unknown keys and unparsable values throw InvalidConfig.
RunConfig apply(RunConfig base, const KeyValues& kv);

/// Full key set with shortest round-trip numbers; apply(RunConfig{}, to_key_values(c)) == c.
KeyValues to_key_values(const RunConfig& config);
std::string to_text(const RunConfig& config);

/// Known keys in text order.
const std::vector<std::string>& config_keys();

}  // namespace strawkit::cli
