#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "aoc/cli.hpp"
#include "aoc/errors.hpp"
#include "aoc/scattering.hpp"
#include "aoc/sweep.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace aoc;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "aoc");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / ("aoc_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

SweepConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_sweep_config(in);
}

}  // namespace

TEST_CASE("config parsing") {
  auto cfg = parse(R"(
[potential]
family = "square_well"
v0 = -0.5
a = 1.0

[sweep]
rho = 1.0
N = [50, 100, 200]
fit_fraction = 0.75
workers = 2

[grid]
nodes_per_wavelength = 24

[tolerances]
ode = 1e-10

[output]
csv = "out.csv"  # comment
)");
  CHECK(cfg.potential.family == PotentialFamily::square_well);
  CHECK(cfg.potential.v0 == -0.5);
  CHECK(cfg.N_list == std::vector<int>{50, 100, 200});
  CHECK(cfg.fit_fraction == 0.75);
  CHECK(cfg.workers == 2);
  CHECK(cfg.grid.nodes_per_wavelength == 24);
  CHECK(cfg.tol.ode == 1e-10);
  CHECK(cfg.csv_path == "out.csv");
  CHECK_NOTHROW(cfg.validate());

  auto tab = parse("[potential]\nfamily = table\nx = [-1, 0, 1]\nv = [0, -1, 0]\n");
  CHECK(tab.potential.make()(0.0) == -1.0);

  CHECK_THROWS_AS(parse("[potential]\nv0 = 1\ncolour = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[potential]\nv0 = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse("[potential]\na = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[extras]\nv0 = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[potential]\nfamily = triangle\nv0 = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[potential]\nv0 = 1\n[sweep]\nN = [10, 5]\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse("[potential]\nv0 = 1\n[sweep]\nrho = -1\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse("[potential]\nv0 = 1\n[tolerances]\node = 2\n").validate(), ConfigError);
  CHECK_THROWS_AS(load_sweep_config("/nonexistent/config.toml"), ConfigError);
}

TEST_CASE("helpers") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
  std::vector<int> N{10, 20, 40, 80};
  std::vector<double> y;
  for (int n : N) y.push_back(0.3 * std::log(n) - 1.25);
  auto [slope, icpt] = fit_log_slope(N, y);
  CHECK(slope == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(icpt == doctest::Approx(-1.25).epsilon(1e-13));
  CHECK_THROWS_AS(fit_log_slope({5}, {1.0}), DomainError);

  SweepConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.rho = 1.5;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hex64(config_hash(a)).size() == 16);
}

TEST_CASE("sweep with zero potential") {
  SweepConfig cfg;
  cfg.potential.v0 = 0.0;
  cfg.N_list = {5, 10, 20, 40};
  auto r = run_sweep(cfg);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) {
    CHECK(row.ok());
    CHECK(std::abs(row.I) <= 1e-10);
    CHECK(std::abs(row.lnD) <= 1e-10);
    CHECK(row.M == row.N);
  }
  CHECK(r.fit_ok);
  CHECK(std::abs(r.gamma_fit) <= 1e-8);
  CHECK(r.gamma.scattering == 0.0);
}

TEST_CASE("sweep output contract and determinism") {
  SweepConfig cfg;
  cfg.potential.v0 = -0.5;
  cfg.N_list = {10, 20, 40};
  std::ostringstream c1, c2;
  write_csv(run_sweep(cfg), c1);
  cfg.workers = 3;
  auto r = run_sweep(cfg);
  write_csv(r, c2);
  CHECK(c1.str() == c2.str());
  CHECK(c1.str().rfind("N,L,I,lnD,defect,M,status\n", 0) == 0);
  std::istringstream lines(c1.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 4);

  auto j = nlohmann::json::parse(summary_json(r, cfg));
  CHECK(j["config_hash"] == hex64(config_hash(cfg)));
  CHECK(j["gamma_scattering"].get<double>() == doctest::Approx(gamma_scattering(cfg.potential.make(), pi * pi)));
  CHECK(j.contains("smallness"));
  CHECK(j["grid"]["nodes_per_wavelength"] == 16);
  CHECK(j["gamma_route_mismatch"] == false);
  CHECK(j["fit_N"].size() == 3);
}

TEST_CASE("failed rows do not stop the sweep") {
  SweepConfig cfg;
  cfg.potential.v0 = -0.5;
  cfg.N_list = {10, 20, 40};
  cfg.grid.nodes_per_panel = 2;
  cfg.tol.ode = 1e-11;
  auto r = run_sweep(cfg);
  CHECK(r.rows.size() == 3);
}

TEST_CASE("command line") {
  SUBCASE("usage errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"gamma", "--bogus"}).code == 2);
    CHECK(run({"gamma", "--potential", "hexagon", "--v0", "1"}).code == 2);
    CHECK(run({"sweep", "--config", "/nonexistent.toml"}).code == 2);
    CHECK(run({"gamma", "--npw", "4", "--v0", "1"}).code == 2);
  }
  SUBCASE("gamma") {
    auto r = run({"gamma", "--potential", "square_well", "--v0", "-0.5", "--a", "1", "--nu", "9.8696044010893586"});
    CHECK(r.code == 0);
    auto pos = r.out.find("gamma_scattering=");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 17)) == doctest::Approx(0.0012506591099).epsilon(1e-9));
    CHECK(r.out.find("routes disagree") == std::string::npos);
    CHECK(r.out.find("gamma_matrix=") != std::string::npos);
    CHECK(r.out.find("gamma_gkm=") != std::string::npos);
    CHECK(r.out.find("|matrix-scattering|=") != std::string::npos);
    auto j = run({"gamma", "--v0", "0.5", "--json"});
    CHECK(j.code == 0);
    auto parsed = nlohmann::json::parse(j.out);
    CHECK(parsed["gkm_vs_scattering"].get<double>() <= 1e-10);
  }
  SUBCASE("spectrum") {
    auto r = run({"spectrum", "--v0", "-0.5", "--N", "10", "--kmax", "5"});
    CHECK(r.code == 0);
    CHECK(r.out.find("count_below=10") != std::string::npos);
    CHECK(r.out.find("bargmann_upper_bound=") != std::string::npos);
  }
  SUBCASE("anderson") {
    auto r = run({"anderson", "--v0", "0.1", "--N", "10", "--contour", "--json"});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["M"] == 10);
    CHECK(j["contour"]["difference"].get<double>() <= 1e-3);
  }
  SUBCASE("audit") {
    auto r = run({"audit", "--potential", "square_well", "--v0", "0.5", "--a", "1", "--N", "20", "--rho", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS birman_schwinger_norm") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("all inequalities hold") != std::string::npos);
  }
  SUBCASE("sweep files") {
    auto dir = temp_dir();
    auto cfg = dir / "sweep.toml";
    std::ofstream(cfg) << "[potential]\nv0 = -0.5\n[sweep]\nN = [10, 20, 40]\n[output]\ncsv = \""
                       << (dir / "a.csv").string() << "\"\njson = \"" << (dir / "a.json").string() << "\"\n";
    auto r = run({"sweep", "--config", cfg.string()});
    CHECK(r.code == 0);
    auto r2 = run({"sweep", "--config", cfg.string(), "--csv", (dir / "b.csv").string(), "--workers", "2"});
    CHECK(r2.code == 0);
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(f), {});
    };
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    auto j = nlohmann::json::parse(slurp(dir / "a.json"));
    CHECK(j.contains("gamma_fit"));
    fs::remove_all(dir);
  }
}
