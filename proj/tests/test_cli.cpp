#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "cli_support.hpp"
#include "strawkit/config.hpp"
#include "strawkit/error.hpp"

using namespace strawkit;
using namespace strawkit::cli;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

RunConfig random_config(std::mt19937_64& rng) {
  RunConfig c;
  c.subcommand = "track";
  c.inputs = {"a.ply", "dir/b.ply"};
  c.out = "results/x";
  c.threads = 1 + static_cast<unsigned>(rng() % 16);
  c.seed = rng();
  c.resolution = testing::uniform(rng, 0.1, 5.0);
  c.exclude = {6};
  c.mesh_method = leaf::MeshMethod::Bpa;
  c.zabawa.outlier_k = 1 + rng() % 30;
  c.zabawa.outlier_std_ratio = testing::uniform(rng, 0.5, 4.0);
  c.zabawa.subsample = rng() % 2 == 0;
  c.zabawa.radius_multipliers = {testing::uniform(rng, 0.5, 2), testing::uniform(rng, 2, 8)};
  c.zabawa.max_hole_edges = rng() % 100;
  c.gt_mesh = "meshes";
  c.skeleton_method = skel::SkeletonMethod::Som;
  c.skeleton_class = 1 + static_cast<int>(rng() % 9);
  if (rng() % 2) c.skeleton.root = Vec3(testing::uniform(rng, -1, 1), 1.0 / 3.0, 1e-17);
  c.skeleton.bin_count = 1 + static_cast<int>(rng() % 40);
  c.skeleton.knn = 2 + rng() % 20;
  c.skeleton.som_fraction = testing::uniform(rng, 0.001, 1.0);
  c.skeleton.som_min_nodes = 2 + rng() % 5;
  c.skeleton.som_epochs = 1 + static_cast<int>(rng() % 500);
  c.skeleton.som_lr_start = testing::uniform(rng, 0.1, 1);
  c.skeleton.som_lr_end = testing::uniform(rng, 0.001, 0.1);
  c.skeleton.som_sigma_end = testing::uniform(rng, 0.1, 2);
  c.skeleton.rng_seed = c.seed;
  c.match.s_dense = testing::uniform(rng, 0.05, 1);
  c.match.t_match = testing::uniform(rng, 0.05, 1);
  c.match.t_line = testing::uniform(rng, 0.05, 1);
  c.match.unmatched_cost = testing::uniform(rng, 10, 1e6);
  c.gt = "gt";
  c.est = "est";
  c.kind = "stem-curved";
  return c;
}

}  // namespace

TEST_CASE("config text round trips losslessly") {
  CHECK(cli::apply(RunConfig{}, to_key_values(RunConfig{})) == RunConfig{});
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const RunConfig c = random_config(rng);
    CHECK(cli::apply(RunConfig{}, to_key_values(c)) == c);
    CHECK(cli::apply(RunConfig{}, parse_key_values(to_text(c))) == c);
    CHECK(to_text(cli::apply(RunConfig{}, parse_key_values(to_text(c)))) == to_text(c));
  }
  const auto keys = to_key_values(RunConfig{});
  CHECK(keys.size() == config_keys().size());
}

TEST_CASE("config parsing rejects malformed text") {
  CHECK(parse_key_values("# comment\n\n  seed = 5  \n") == KeyValues{{"seed", "5"}});
  CHECK(code_of([] { parse_key_values("seed 5\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_key_values("= 5\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_key_values("seed = 5\nseed = 6\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cli::apply(RunConfig{}, {{"colour", "red"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cli::apply(RunConfig{}, {{"resolution", "-1"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cli::apply(RunConfig{}, {{"resolution", "1mm"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cli::apply(RunConfig{}, {{"threads", "0"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cli::apply(RunConfig{}, {{"root", "1,2"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cli::apply(RunConfig{}, {{"mesh-method", "poisson"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cli::apply(RunConfig{}, {{"t-match", "2000"}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("exit codes") {
  const auto dir = testing::temp_dir("cli_exit");
  fs::create_directories(dir / "empty");
  const auto ok = testing::run_cli({"validate", (dir / "empty").string(), "--out", (dir / "v").string()});
  CHECK(ok.exit_code == kExitOk);
  CHECK(fs::exists(dir / "v" / "validation.json"));

  write(dir / "bad.cfg", "resolution = banana\n");
  CHECK(testing::run_cli({"volume", "x.ply", "--config", (dir / "bad.cfg").string()}).exit_code == kExitInvalidConfig);
  CHECK(testing::run_cli({"volume", "x.ply", "--no-such-flag", "1"}).exit_code == kExitInvalidConfig);
  CHECK(testing::run_cli({"frobnicate"}).exit_code == kExitInvalidConfig);
  CHECK(testing::run_cli({"skeletonize", "x.ply", "--method", "l1"}).exit_code == kExitInvalidConfig);
  CHECK(testing::run_cli({"volume", "--out", (dir / "o").string()}).exit_code == kExitInvalidConfig);

  // a GT skeleton without an estimate is a per-item failure; the rest is still scored
  const auto data = dir / "data";
  REQUIRE(testing::synth_dataset(data, 7).exit_code == kExitOk);
  REQUIRE(testing::run_cli({"skeletonize", (data / "straight7_20250101.ply").string(), "--out", (dir / "sk").string()})
              .exit_code == kExitOk);
  const auto mismatched = testing::run_cli({"eval-skeleton", "--gt", (data / "gt").string(), "--est",
                                            (dir / "sk" / "skeletons").string(), "--out", (dir / "ev").string()});
  CHECK(mismatched.exit_code == kExitItemFailure);
  REQUIRE(fs::exists(dir / "ev" / "eval_skeleton.json"));
  const auto summary = nlohmann::json::parse(testing::read_file(dir / "ev" / "eval_skeleton.json"));
  CHECK(summary["count"] == 1);

  CHECK(testing::run_cli({"volume", (dir / "missing.ply").string(), "--out", (dir / "vol").string()}).exit_code ==
        kExitItemFailure);
}

TEST_CASE("flags override the config file and the effective config can be saved") {
  const auto dir = testing::temp_dir("cli_config");
  write(dir / "run.cfg", "resolution = 2\nseed = 11\n");
  const auto r = testing::run_cli({"synth", "--config", (dir / "run.cfg").string(), "--seed", "3", "--kind",
                                   "stem-straight", "--out", (dir / "s").string(), "--save-config",
                                   (dir / "saved.cfg").string()});
  REQUIRE(r.exit_code == kExitOk);
  const RunConfig saved = cli::apply(RunConfig{}, read_key_values(dir / "saved.cfg"));
  CHECK(saved.resolution == 2.0);
  CHECK(saved.seed == 3);
  CHECK(saved.kind == "stem-straight");
  CHECK(fs::exists(dir / "s" / "straight3_20250101.ply"));
}

TEST_CASE("synth is deterministic per seed") {
  const auto dir = testing::temp_dir("cli_synth");
  REQUIRE(testing::synth_dataset(dir / "a", 7).exit_code == kExitOk);
  REQUIRE(testing::synth_dataset(dir / "b", 7).exit_code == kExitOk);
  REQUIRE(testing::synth_dataset(dir / "c", 8).exit_code == kExitOk);
  const auto a = testing::snapshot(dir / "a");
  CHECK(a.size() == 20);
  CHECK(a == testing::snapshot(dir / "b"));
  CHECK(a.at("curved7_20250101.ply") != testing::snapshot(dir / "c").at("curved8_20250101.ply"));
}

TEST_CASE("every subcommand is byte-identical across reruns and thread counts") {
  const auto dir = testing::temp_dir("cli_determinism");
  REQUIRE(testing::synth_dataset(dir / "data", 7).exit_code == kExitOk);
  const auto one = testing::run_every_subcommand(dir / "data", dir / "t1", 1, 7);
  const auto again = testing::run_every_subcommand(dir / "data", dir / "t1b", 1, 7);
  const auto eight = testing::run_every_subcommand(dir / "data", dir / "t8", 8, 7);
  for (const auto& [name, code] : one) CHECK_MESSAGE(code == kExitOk, name);
  CHECK(one == again);
  CHECK(one == eight);
  const auto s1 = testing::snapshot(dir / "t1");
  for (const auto& name : {"validate", "volume", "leaf-area", "skeletonize", "eval-skeleton", "track", "synth"}) {
    bool any = false;
    for (const auto& [path, bytes] : s1) any = any || path.rfind(std::string(name) + "/", 0) == 0;
    CHECK_MESSAGE(any, name);
  }
  CHECK(s1 == testing::snapshot(dir / "t1b"));
  CHECK(s1 == testing::snapshot(dir / "t8"));
}
