#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowtopo/run.hpp"

using namespace flowtopo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flowtopo_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLOWTOPO_BIN) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

const std::string kConfigDir = FLOWTOPO_CONFIG_DIR;

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("minimal config fills defaults and echoes them") {
    const RunConfig c = parse_config_text("{}");
    CHECK(c.nx == 32);
    CHECK(c.mu == 1.0);
    CHECK(c.inner_product == "h1");
    const std::string echo = c.echo_json();
    CHECK(echo.find("\"nx\": 32") != std::string::npos);
    CHECK(echo.find("\"rtol\"") != std::string::npos);
    // echo parses back to the same config
    const RunConfig c2 = parse_config_text(echo);
    CHECK(c2.echo_json() == echo);
  }
  SUBCASE("growth-condition violation names the constraint") {
    try {
      parse_config_text(R"({"alpha": {"a0": 1.0, "s": 0.9}})");
      CHECK(false);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("growth condition o(eps^{-2/3})") != std::string::npos);
    }
  }
  SUBCASE("range violations are collected, not truncated") {
    try {
      parse_config_text(R"({"objective": {"beta": 1.5, "gamma": -1.0}, "physics": {"mu": 0.0}})");
      CHECK(false);
    } catch (const ConfigError& e) {
      CHECK(e.issues.size() >= 3);
      bool saw_beta = false;
      for (const auto& s : e.issues) saw_beta |= s.find("beta") != std::string::npos;
      CHECK(saw_beta);
    }
  }
  SUBCASE("unknown keys are rejected by name") {
    try {
      parse_config_text(R"({"mesh": {"nx": 8, "resolution": 3}})");
      CHECK(false);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("mesh.resolution") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text(R"({"grid": {}})"), ConfigError);
  }
  SUBCASE("json syntax errors are reported") {
    CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
  }
  SUBCASE("polynomial escape hatch evaluates with exact derivatives") {
    const RunConfig c = parse_config_text(
        R"({"physics": {"force": {"kind": "poly", "fx": [[0.0, 1.0]], "fy": [[0.0],[2.0]]}}})");
    const BodyForce f = make_force(c.force);
    // fx = y, fy = 2x
    CHECK(f.value(Vec2(0.5, 0.25)).x() == doctest::Approx(0.25));
    CHECK(f.value(Vec2(0.5, 0.25)).y() == doctest::Approx(1.0));
    CHECK(f.jacobian(Vec2(0.3, 0.7))(0, 1) == doctest::Approx(1.0));
    CHECK(f.jacobian(Vec2(0.3, 0.7))(1, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("boundary presets carry zero net flux") {
  const Mesh mesh = Mesh::structured(24, 24, 1.0, 1.0);
  for (const std::string kind : {"poiseuille", "diffuser", "pipe", "pipe_bend", "obstacle"}) {
    BoundarySpec spec;
    spec.kind = kind;
    const BoundaryData g = make_boundary(spec, 1.0, 1.0);
    CHECK(std::abs(boundary_flux(mesh, g.value)) <= 1e-10);
  }
}

TEST_CASE("cli end-to-end") {
  SUBCASE("solve mode writes a summary with margin and residual") {
    const fs::path out = fresh_dir("solve");
    const int rc =
        run_cli("solve --config " + kConfigDir + "/solve_smoke.json --out " + out.string());
    CHECK(rc == 0);
    const std::string summary = slurp(out / "summary.json");
    CHECK(summary.find("\"margin\"") != std::string::npos);
    CHECK(summary.find("\"residual\"") != std::string::npos);
    CHECK(fs::exists(out / "config.json"));
    CHECK(fs::exists(out / "history.csv"));
    CHECK(fs::exists(out / "state.vtk"));
    // VTK legacy header
    CHECK(slurp(out / "state.vtk").rfind("# vtk DataFile", 0) == 0);
  }
  SUBCASE("invalid mode exits with usage code 2") {
    CHECK(run_cli("explode --config " + kConfigDir + "/solve_smoke.json") == 2);
  }
  SUBCASE("config errors exit with code 2") {
    const fs::path bad = fresh_dir("badcfg") / "bad.json";
    std::ofstream(bad) << R"({"alpha": {"s": 0.9}})";
    CHECK(run_cli("solve --config " + bad.string()) == 2);
    CHECK(run_cli("solve --config /nonexistent/path.json") == 2);
  }
}

TEST_CASE("reruns with identical config are byte-identical") {
  const RunConfig cfg = parse_config(kConfigDir + "/optimize_smoke.json");
  const fs::path a = fresh_dir("deta");
  const fs::path b = fresh_dir("detb");
  CHECK(run_mode("optimize", cfg, a.string()) == 0);
  CHECK(run_mode("optimize", cfg, b.string()) == 0);
  CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "config.json") == slurp(b / "config.json"));
  CHECK(slurp(a / "final.vtk") == slurp(b / "final.vtk"));
}

TEST_CASE("gamma-check mode passes on the shipped config") {
  RunConfig cfg = parse_config(kConfigDir + "/gamma_check.json");
  cfg.write_vtk = false;
  const fs::path out = fresh_dir("gamma");
  CHECK(run_mode("gamma-check", cfg, out.string()) == 0);
  const std::string summary = slurp(out / "summary.json");
  CHECK(summary.find("\"pass\": true") != std::string::npos);
  CHECK(fs::exists(out / "gamma_check.csv"));
}
