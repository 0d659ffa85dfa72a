#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dep/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  std::vector<const char*> argv{"dephydro"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return dep::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("dephydro_test_" + tag);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("flux-check writes the pinned schema and passes", "[cli]") {
  const auto dir = fresh_dir("flux");
  REQUIRE(run({"flux-check", "--out", dir.string()}) == 0);
  REQUIRE(fs::exists(dir / "report.json"));
  REQUIRE(fs::exists(dir / "meta.json"));
  REQUIRE(fs::exists(dir / "config_echo.cfg"));
  const auto csv = slurp(dir / "flux_check.csv");
  REQUIRE(csv.rfind("rho,nu_rho_j,G_rho,abs_diff\n", 0) == 0);
  REQUIRE(csv.back() == '\n');
  // 101 data rows plus the header
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 102);
  // echo reparses
  const auto echoed = dep::parse_config_text(slurp(dir / "config_echo.cfg"));
  REQUIRE(echoed.at("flux.points") == "101");
}

TEST_CASE("riemann subcommand emits the fan profile", "[cli]") {
  const auto dir = fresh_dir("riemann");
  REQUIRE(run({"riemann", "--lambda", "1", "--rho", "0", "--t", "1", "--grid",
               "2001", "--out", dir.string()}) == 0);
  const auto csv = slurp(dir / "riemann.csv");
  REQUIRE(csv.rfind("v,u\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 2002);
  // spot values: u = 1 well left of the fan, 0 beyond the jump at 1/4
  bool saw_left = false, saw_right = false;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double v = std::stod(line.substr(0, comma));
    const double u = std::stod(line.substr(comma + 1));
    if (v < -2.0) {
      saw_left = true;
      REQUIRE(u == 1.0);
    }
    if (v > 0.26) {
      saw_right = true;
      REQUIRE(u == 0.0);
    }
  }
  REQUIRE(saw_left);
  REQUIRE(saw_right);
}

TEST_CASE("reruns are byte-identical apart from meta.json", "[cli]") {
  const auto d1 = fresh_dir("rerun1");
  const auto d2 = fresh_dir("rerun2");
  REQUIRE(run({"riemann", "--out", d1.string()}) == 0);
  REQUIRE(run({"riemann", "--out", d2.string()}) == 0);
  REQUIRE(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
  REQUIRE(slurp(d1 / "riemann.csv") == slurp(d2 / "riemann.csv"));
  REQUIRE(slurp(d1 / "config_echo.cfg") == slurp(d2 / "config_echo.cfg"));
}

TEST_CASE("missing config file exits 2 without outputs", "[cli]") {
  const auto dir = fresh_dir("missing");
  REQUIRE(run({"flux-check", "--config", "/nonexistent/path.cfg", "--out",
               dir.string()}) == 2);
  REQUIRE_FALSE(fs::exists(dir));
}

TEST_CASE("unknown keys are errors, not warnings", "[cli]") {
  const auto dir = fresh_dir("unknown");
  REQUIRE(run({"flux-check", "--set", "flux.nope=3", "--out", dir.string()}) == 2);
  REQUIRE_FALSE(fs::exists(dir));
  // malformed --set
  REQUIRE(run({"flux-check", "--set", "fluxpoints", "--out", dir.string()}) == 2);
  REQUIRE_FALSE(fs::exists(dir));
}

TEST_CASE("config file merges under flag overrides", "[cli]") {
  const auto dir = fresh_dir("merge");
  const auto cfg_path = fs::temp_directory_path() / "dephydro_test_merge.cfg";
  {
    std::ofstream out(cfg_path);
    out << "# comment line\n";
    out << "flux.points = 11\n";
  }
  REQUIRE(run({"flux-check", "--config", cfg_path.string(), "--set",
               "flux.points=21", "--out", dir.string()}) == 0);
  const auto echoed = dep::parse_config_text(slurp(dir / "config_echo.cfg"));
  REQUIRE(echoed.at("flux.points") == "21");
  const auto csv = slurp(dir / "flux_check.csv");
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 22);
}

TEST_CASE("environment seed override lands in the report", "[cli]") {
  const auto dir = fresh_dir("envseed");
  setenv("DEPHYDRO_SEED", "987654321", 1);
  REQUIRE(run({"flux-check", "--out", dir.string()}) == 0);
  unsetenv("DEPHYDRO_SEED");
  const auto json = slurp(dir / "report.json");
  REQUIRE(json.find("\"master_seed\": 987654321") != std::string::npos);
}

TEST_CASE("strong-hydro rejects the aggregate driver", "[cli]") {
  const auto dir = fresh_dir("strongmode");
  REQUIRE(run({"strong-hydro", "--set", "strong.mode=gillespie", "--out",
               dir.string()}) == 2);
  REQUIRE_FALSE(fs::exists(dir));
}

TEST_CASE("usage errors exit 2", "[cli]") {
  REQUIRE(run({"not-a-subcommand"}) == 2);
  REQUIRE(run({}) == 2);
}

TEST_CASE("godunov subcommand reports conservation", "[cli]") {
  const auto dir = fresh_dir("godunov");
  REQUIRE(run({"godunov", "--lambda", "0.5", "--rho", "0", "--dx", "0.01",
               "--t", "0.5", "--out", dir.string()}) == 0);
  const auto csv = slurp(dir / "profile.csv");
  REQUIRE(csv.rfind("x_macro,empirical,reference,abs_err\n", 0) == 0);
  const auto json = slurp(dir / "report.json");
  REQUIRE(json.find("discrete-conservation") != std::string::npos);
}
