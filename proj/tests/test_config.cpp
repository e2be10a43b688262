#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "glvortex/experiment.hpp"

namespace fs = std::filesystem;
using namespace glv;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("glvortex_test_" + name);
  fs::remove_all(p);
  return p;
}

bool has_key(const std::vector<Diagnostic>& d, const std::string& key, const std::string& severity = "error") {
  for (const auto& x : d)
    if (x.key == key && x.severity == severity) return true;
  return false;
}

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text, "case.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return "";
}

const char* kSmall2d = R"(
seed = 7
[geometry]
dim = 2
lengths = 1
grid = 32
[integrator]
t_end = 0.01
save_snapshots = none
[initial]
kind = wave
k = 1 0
q = 0 1
[ladder]
epsilons = 0.1
[monotonicity]
enabled = false
[hodge]
enabled = false
[vortex]
enabled = false
)";

}  // namespace

TEST(Config, ErrorsCarryLineAndKey) {
  auto msg = expect_config_error("[geometry]\ndim = 3\ngrid = 16 x 16\n");
  EXPECT_NE(msg.find("case.ini:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("geometry.grid"), std::string::npos) << msg;

  msg = expect_config_error("[integrator]\n\nt_end = 0.1\nstep = 3\n");
  EXPECT_NE(msg.find("case.ini:4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("integrator.step"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown key"), std::string::npos) << msg;

  msg = expect_config_error("[initial]\nkind = spiral\n");
  EXPECT_NE(msg.find("case.ini:2"), std::string::npos) << msg;

  msg = expect_config_error("[ladder]\nepsilons = 0.05\n[ladder]\nepsilons = 0.04\n");
  EXPECT_NE(msg.find("case.ini:"), std::string::npos) << msg;

  msg = expect_config_error("[geometry]\ndim = 2\n[initial]\nkind = ring\n");
  EXPECT_NE(msg.find("initial.kind"), std::string::npos) << msg;
}

TEST(Config, DefaultFileIsClean) {
  ExperimentConfig c = load_config(fs::path(GLV_SOURCE_DIR) / "configs" / "default.ini");
  c.output = scratch("default").string();
  const auto d = validate(c);
  for (const auto& x : d) ADD_FAILURE() << x.to_json().dump();
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(c.dim, 3);
  EXPECT_TRUE(std::holds_alternative<PhaseWave>(c.spec));
}

TEST(Config, ValidationDiagnostics) {
  const std::string ring = "[geometry]\ndim = 3\ngrid = 16\n[initial]\nkind = ring\nradius = 0.25\n[ladder]\nepsilons = 0.1\n";
  auto c = parse_config(ring);
  c.output = scratch("validate").string();
  EXPECT_TRUE(has_key(validate(c), "geometry.grid"));
  c.allow_underresolved = true;
  EXPECT_FALSE(has_errors(validate(c)));
  EXPECT_TRUE(has_key(validate(c), "geometry.grid", "warning"));

  c = parse_config("[geometry]\ndim = 3\ngrid = 64\n[initial]\nkind = ring\nradius = 0.6\n[ladder]\nepsilons = 0.05\n");
  c.output = scratch("validate").string();
  EXPECT_TRUE(has_key(validate(c), "initial.radius"));

  c = parse_config("[ladder]\nepsilons = 0.05 0.06\n[geometry]\ngrid = 64\n");
  c.output = scratch("validate").string();
  EXPECT_TRUE(has_key(validate(c), "ladder.epsilons"));

  c = parse_config("[geometry]\ndim = 2\ngrid = 64\n[initial]\nkind = points\npositions = 0.25 0.5 0.75 0.5\ndegrees = 1 1\n"
                   "[ladder]\nepsilons = 0.05\n");
  c.output = scratch("validate").string();
  EXPECT_TRUE(has_key(validate(c), "initial.degrees"));

  c = parse_config(kSmall2d);
  c.mcf = true;
  c.clearing_out = true;
  c.sigmas = {1.5};
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "not a directory";
  c.output = (blocker / "out").string();
  const auto d = validate(c);
  EXPECT_TRUE(has_key(d, "mcf.enabled"));
  EXPECT_TRUE(has_key(d, "clearing_out.sigmas"));
  EXPECT_TRUE(has_key(d, "output"));
}

TEST(Experiment, InvalidConfigWritesNothing) {
  auto c = parse_config("[ladder]\nepsilons = 0.05 0.06\n[geometry]\ngrid = 64\n");
  c.output = scratch("invalid").string();
  const auto r = run(c);
  EXPECT_EQ(r.status, 3);
  EXPECT_FALSE(fs::exists(c.output));
}

TEST(Experiment, EmptyAnalysisSetStillHasManifest) {
  auto c = parse_config(kSmall2d);
  c.output = scratch("empty").string();
  const auto r = run(c);
  ASSERT_EQ(r.status, 0);
  const auto m = nlohmann::json::parse(read_file(r.directory / "manifest.json"));
  EXPECT_EQ(m["status"], 0);
  EXPECT_EQ(m["versions"]["glvortex"], kVersion);
  EXPECT_EQ(m["seed"], 7);
  ASSERT_FALSE(m["files"].empty());
  for (const auto& f : m["files"]) {
    const fs::path p = r.directory / f["path"].get<std::string>();
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_EQ(f["sha256"], sha256_file(p));
    EXPECT_EQ(f["bytes"], fs::file_size(p));
  }
  EXPECT_EQ(read_file(r.directory / "config.ini"), kSmall2d);
  EXPECT_TRUE(fs::exists(r.directory / "eps00_0.1" / "energy.csv"));
  EXPECT_FALSE(fs::exists(r.directory / "eps00_0.1" / "monotonicity.csv"));
}

TEST(Experiment, KnownDigest) {
  // "abc" from FIPS 180-2
  const fs::path p = scratch("digest");
  fs::create_directories(p);
  std::ofstream(p / "abc") << "abc";
  EXPECT_EQ(sha256_file(p / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Experiment, DeterministicOutputs) {
  auto c = parse_config(kSmall2d);
  c.monotonicity = true;
  c.hodge = true;
  c.vortex = true;
  c.integrator.snapshot_stride = 1;
  c.output = scratch("det_a").string();
  const auto a = run(c);
  c.output = scratch("det_b").string();
  const auto b = run(c);
  ASSERT_EQ(a.status, 0);
  ASSERT_EQ(b.status, 0);
  const auto fa = a.manifest["files"], fb = b.manifest["files"];
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    EXPECT_EQ(fa[i]["path"], fb[i]["path"]);
    EXPECT_EQ(fa[i]["sha256"], fb[i]["sha256"]) << fa[i]["path"];
  }
  EXPECT_EQ(read_file(a.directory / "eps00_0.1" / "monotonicity.csv"),
            read_file(b.directory / "eps00_0.1" / "monotonicity.csv"));
}

TEST(Experiment, LadderLayoutAndBlockIsolation) {
  auto c = parse_config(kSmall2d);
  c.ladder = {0.2, 0.15, 0.1};
  c.integrator.t_end = 0.02;
  c.clearing_out = true;
  c.sigmas = {0.5, 0.25};
  c.radius_factors = {1.0};
  c.monotonicity = true;
  c.mono_r_min = 0.05;
  c.mono_r_max = 0.06;  // too narrow for two snapshot-aligned radii at the coarse steps
  c.integrator.snapshot_stride = 1000;
  c.output = scratch("ladder").string();
  const auto r = run(c);
  EXPECT_EQ(r.status, 1);
  for (const char* dir : {"eps00_0.2", "eps01_0.15", "eps02_0.1"}) {
    EXPECT_TRUE(fs::exists(r.directory / dir / "energy.csv")) << dir;
    EXPECT_TRUE(fs::exists(r.directory / dir / "summary.json")) << dir;
  }
  const auto s = nlohmann::json::parse(read_file(r.directory / "ladder_summary.json"));
  EXPECT_EQ(s["levels"].size(), 3u);
  EXPECT_TRUE(fs::exists(r.directory / "clearing_out.json"));

  std::size_t failed = 0;
  for (const auto& b : r.blocks) {
    if (b.ok) continue;
    ++failed;
    EXPECT_EQ(b.name, "monotonicity");
    EXPECT_FALSE(b.error.empty());
  }
  EXPECT_EQ(failed, 3u);
  const auto m = nlohmann::json::parse(read_file(r.directory / "manifest.json"));
  EXPECT_EQ(m["status"], 1);
}
