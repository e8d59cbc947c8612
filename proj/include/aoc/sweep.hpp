#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aoc/anderson_metrics.hpp"
#include "aoc/core_model.hpp"
#include "aoc/operator_calculus.hpp"

namespace aoc {

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::square_well;
  double v0 = 0.0;
  double a = 1.0;
  double sigma = 0.5;
  std::vector<double> table_x;
  std::vector<double> table_v;

  Potential make() const;
  std::string canonical() const;
};

struct SweepTolerances {
  double ode = 1e-11;
  double root = 1e-13;
  double scattering = 1e-12;
  double contour = 1e-8;
};

struct SweepConfig {
  PotentialSpec potential;
  double rho = 1.0;
  std::vector<int> N_list{50, 100, 200, 400, 800};
  GridOptions grid{};
  SweepTolerances tol{};
  /// Fraction of N_list (from the top) used by the slope fit.
  double fit_fraction = 0.5;
  std::string csv_path;
  std::string json_path;
  int workers = 1;

  /// Throws ConfigError.
  void validate() const;
  std::string canonical() const;
};

/// FNV-1a 64-bit hash of the canonical config text.
std::uint64_t config_hash(const SweepConfig& cfg);
std::string hex64(std::uint64_t h);

struct SweepRow {
  int N = 0;
  double L = 0.0;
  double I = 0.0;
  double lnD = 0.0;
  double defect_norm = 0.0;
  int M = -1;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct GammaReport {
  double nu = 0.0;
  double scattering = 0.0;
  double matrix = 0.0;
  double gkm = 0.0;
  /// |gamma_matrix(default grid) - gamma_matrix(doubled grid)|
  double matrix_self_convergence = 0.0;
  double unitarity_defect = 0.0;
  /// |gamma_matrix - gamma_scattering| above both 10 * matrix_self_convergence and 1e-9 * max(gamma, 1e-3)
  bool route_mismatch = false;
  SmallnessReport smallness;
};

GammaReport gamma_report(const Potential& V, double nu, const GridOptions& grid = {}, double scattering_tol = 1e-12);

struct SweepResult {
  std::vector<SweepRow> rows;
  double gamma_fit = 0.0;
  double c_fit = 0.0;
  std::vector<int> fit_N;
  bool fit_ok = false;
  GammaReport gamma;
  /// I_N - gamma_scattering * ln N for successful rows
  std::vector<double> residuals;
};

/// Least-squares slope and intercept of y against ln N.
std::pair<double, double> fit_log_slope(const std::vector<int>& N, const std::vector<double>& y);

SweepRow sweep_row(int N, const Potential& V, double rho, const SweepConfig& cfg);
SweepResult run_sweep(const SweepConfig& cfg);

/// Shortest round-trip decimal.
std::string format_double(double x);

void write_csv(const SweepResult& r, std::ostream& os);
std::string summary_json(const SweepResult& r, const SweepConfig& cfg, int indent = 2);

/// Parses an INI/TOML-style sweep file; throws ConfigError.
SweepConfig load_sweep_config(const std::string& path);
SweepConfig parse_sweep_config(std::istream& in);

}  // namespace aoc
