#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsslip/run.hpp"

using namespace nsslip;

namespace {

const char* kTiny = R"({
  "domain": {"nx": 8, "ny": 8},
  "physics": {"steps": 16},
  "basis": {"n": 6},
  "initial_state": {"coefficients": [0.5, 0.1]},
  "target": {"kind": "vortex", "amplitude": 0.2},
  "monte_carlo": {"samples": 1, "seed": 5},
  "optimizer": {"max_iters": 3},
  "verify": {"gateaux_eps": [0.1, 0.05, 0.025, 0.0125], "fd_directions": 2, "lifting_trials": 2}
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nsslip_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("serialize then parse is the identity") {
  ExperimentConfig c = parse_config(kTiny);
  std::string a = serialize_config(c);
  std::string b = serialize_config(parse_config(a));
  CHECK(a == b);
  CHECK(a.find("\"nu\": 0.10000000000000001") != std::string::npos);
}

TEST_CASE("config errors name the offending field") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"physics": {"nu": -1.0}})"), doctest::Contains("physics.nu"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"physics": {"viscosity": 1.0}})"), doctest::Contains("physics.viscosity"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"basis": {"n": 2.5}})"), doctest::Contains("basis.n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"noise": {"family": "PINK"}})"), doctest::Contains("PINK"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"target": {"kind": "recorded"}})"), doctest::Contains("target.path"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("simulate with trivial data writes all-zero trajectories and a complete manifest") {
  ExperimentConfig c = parse_config(R"({"domain": {"nx": 8, "ny": 8}, "physics": {"steps": 16}, "basis": {"n": 4},
                                       "monte_carlo": {"samples": 1}})");
  c.output_dir = fresh_dir("zero");
  std::ostringstream log;
  REQUIRE(run_command("simulate", c, log) == kExitOk);
  std::string traj = slurp(std::filesystem::path(c.output_dir) / "dynamics/trajectories.csv");
  std::istringstream in(traj);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    auto pos = line.find(',', line.find(',') + 1);
    pos = line.find(',', pos + 1);
    for (char ch : line.substr(pos)) CHECK((ch == ',' || ch == '0'));
  }
  std::string manifest = slurp(std::filesystem::path(c.output_dir) / "manifest.json");
  for (const char* f : {"config.json", "dynamics/energy_ledger.csv", "dynamics/weights.csv", "dynamics/exp_moments.json",
                        "control/ledger.json"})
    CHECK(manifest.find(f) != std::string::npos);
}

TEST_CASE("exit statuses distinguish config, verification and blow-up failures") {
  std::ostringstream log;
  ExperimentConfig c = parse_config(kTiny);
  c.model.n = 1000;
  c.output_dir = fresh_dir("config");
  CHECK(run_command("spectrum", c, log) == kExitConfig);

  c = parse_config(kTiny);
  c.model.ceiling = 1e-3;
  c.output_dir = fresh_dir("blowup");
  CHECK(run_command("simulate", c, log) == kExitBlowUp);

  c = parse_config(kTiny);
  c.output_dir = fresh_dir("verify_ok");
  CHECK(run_command("verify", c, log) == kExitOk);
  std::string report = slurp(std::filesystem::path(c.output_dir) / "verify/report.json");
  CHECK(report.find("\"SKIPPED\"") != std::string::npos);

  c.verify.fault = "adjoint_sign";
  c.output_dir = fresh_dir("verify_fault");
  CHECK(run_command("verify", c, log) == kExitVerify);
}

TEST_CASE("optimize runs are byte reproducible") {
  ExperimentConfig c = parse_config(kTiny);
  std::ostringstream log;
  std::string d1 = fresh_dir("rep1"), d2 = fresh_dir("rep2");
  c.output_dir = d1;
  REQUIRE(run_command("optimize", c, log) == kExitOk);
  c.output_dir = d2;
  REQUIRE(run_command("optimize", c, log) == kExitOk);
  for (const char* f : {"control/trace.csv", "control/controls_final.json", "control/gradient.csv"})
    CHECK(slurp(std::filesystem::path(d1) / f) == slurp(std::filesystem::path(d2) / f));
}
