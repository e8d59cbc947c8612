#include "aoc/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/parallel.hpp"
#include "aoc/scattering.hpp"

namespace aoc {

int workers_from_env(int fallback) {
  const char* s = std::getenv("AOC_WORKERS");
  if (!s || !*s) return fallback;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v <= 0) return fallback;
  return static_cast<int>(std::min<long>(v, 1024));
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Potential PotentialSpec::make() const {
  switch (family) {
    case PotentialFamily::square_well:
      return v0 == 0.0 ? Potential::zero() : Potential::square_well(v0, a);
    case PotentialFamily::gaussian_truncated:
      return v0 == 0.0 ? Potential::zero() : Potential::gaussian_truncated(v0, sigma, a);
    case PotentialFamily::table:
      return Potential::table(table_x, table_v);
  }
  throw ConfigError("unknown potential family");
}

std::string PotentialSpec::canonical() const {
  std::ostringstream os;
  os << "family=" << to_string(family);
  if (family == PotentialFamily::table) {
    os << ";x=";
    for (double x : table_x) os << format_double(x) << ',';
    os << ";v=";
    for (double v : table_v) os << format_double(v) << ',';
  } else {
    os << ";v0=" << format_double(v0) << ";a=" << format_double(a);
    if (family == PotentialFamily::gaussian_truncated) os << ";sigma=" << format_double(sigma);
  }
  return os.str();
}

void SweepConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be positive");
  if (N_list.empty()) throw ConfigError("N_list is empty");
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] < 1) throw ConfigError("N values must be >= 1");
    if (i > 0 && N_list[i] <= N_list[i - 1]) throw ConfigError("N_list must be strictly increasing");
  }
  for (double t : {tol.ode, tol.root, tol.scattering, tol.contour})
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("tolerances must lie in (0, 1)");
  if (!(fit_fraction > 0.0 && fit_fraction <= 1.0)) throw ConfigError("fit_fraction must lie in (0, 1]");
  if (grid.nodes_per_wavelength < 8) throw ConfigError("nodes_per_wavelength must be >= 8");
  if (grid.nodes_per_panel < 2 || grid.nodes_per_panel > 64) throw ConfigError("nodes_per_panel must lie in [2, 64]");
  if (grid.support_refinement < 1) throw ConfigError("support_refinement must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  potential.make();
}

std::string SweepConfig::canonical() const {
  std::ostringstream os;
  os << potential.canonical() << ";rho=" << format_double(rho) << ";N=";
  for (int n : N_list) os << n << ',';
  os << ";npw=" << grid.nodes_per_wavelength << ";npp=" << grid.nodes_per_panel
     << ";refine=" << grid.support_refinement << ";ode=" << format_double(tol.ode)
     << ";root=" << format_double(tol.root) << ";scat=" << format_double(tol.scattering)
     << ";contour=" << format_double(tol.contour) << ";fit=" << format_double(fit_fraction);
  return os.str();
}

std::uint64_t config_hash(const SweepConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : cfg.canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

GammaReport gamma_report(const Potential& V, double nu, const GridOptions& grid, double scattering_tol) {
  GammaReport g;
  g.nu = nu;
  auto sd = scattering_coefficients(V, std::sqrt(nu), scattering_tol);
  g.scattering = gamma_scattering(sd);
  g.gkm = gamma_gkm(sd);
  g.unitarity_defect = sd.unitarity_defect;
  g.smallness = smallness_report(V, nu);
  if (V.is_zero()) return g;
  double k = std::sqrt(nu);
  g.matrix = gamma_matrix(nu, V, support_grid(V, k, grid));
  GridOptions fine = grid;
  fine.nodes_per_wavelength *= 2;
  double g2 = gamma_matrix(nu, V, support_grid(V, k, fine));
  g.matrix_self_convergence = std::abs(g.matrix - g2);
  double floor = 1e-9 * std::max(std::abs(g.scattering), 1e-3);
  g.route_mismatch = std::abs(g.matrix - g.scattering) > std::max(10.0 * g.matrix_self_convergence, floor);
  return g;
}

std::pair<double, double> fit_log_slope(const std::vector<int>& N, const std::vector<double>& y) {
  if (N.size() != y.size() || N.size() < 2) throw DomainError("fit_log_slope: need at least two points");
  double n = static_cast<double>(N.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < N.size(); ++i) {
    double x = std::log(static_cast<double>(N[i]));
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw DomainError("fit_log_slope: degenerate abscissae");
  double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

SweepRow sweep_row(int N, const Potential& V, double rho, const SweepConfig& cfg) {
  SweepRow row;
  row.N = N;
  row.L = SystemConfig::from_density(rho, N).L;
  try {
    AndersonOptions opt;
    opt.eigen.ode = {cfg.tol.ode, cfg.tol.ode * 1e-2};
    opt.eigen.root_tol = cfg.tol.root;
    opt.eigenfunction_tol = {cfg.tol.ode, cfg.tol.ode * 1e-2};
    opt.workers = cfg.workers;
    auto res = anderson_metrics(N, V, row.L, opt, cfg.grid);
    row.I = res.anderson_integral;
    row.lnD = res.ln_transition;
    row.defect_norm = res.defect_norm;
    row.M = res.M;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    row.status = "failed: " + msg;
  }
  return row;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  Potential V = cfg.potential.make();
  SweepResult out;
  for (int N : cfg.N_list) out.rows.push_back(sweep_row(N, V, cfg.rho, cfg));

  double nu = SystemConfig::from_density(cfg.rho, cfg.N_list.front()).nu;
  out.gamma = gamma_report(V, nu, cfg.grid, cfg.tol.scattering);

  std::size_t count = cfg.N_list.size();
  auto window = static_cast<std::size_t>(std::ceil(cfg.fit_fraction * static_cast<double>(count)));
  window = std::min(count, std::max<std::size_t>(window, 3));
  std::vector<int> fn;
  std::vector<double> fy;
  for (std::size_t i = count - window; i < count; ++i) {
    if (!out.rows[i].ok()) continue;
    fn.push_back(out.rows[i].N);
    fy.push_back(out.rows[i].I);
  }
  for (const auto& r : out.rows)
    if (r.ok()) out.residuals.push_back(r.I - out.gamma.scattering * std::log(static_cast<double>(r.N)));
  out.fit_N = fn;
  if (fn.size() >= 3) {
    auto [slope, icpt] = fit_log_slope(fn, fy);
    out.gamma_fit = slope;
    out.c_fit = icpt;
    out.fit_ok = std::isfinite(slope);
  } else {
    out.gamma_fit = std::numeric_limits<double>::quiet_NaN();
    out.c_fit = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

void write_csv(const SweepResult& r, std::ostream& os) {
  os << "N,L,I,lnD,defect,M,status\n";
  for (const auto& row : r.rows) {
    os << row.N << ',' << format_double(row.L) << ',' << format_double(row.I) << ',' << format_double(row.lnD)
       << ',' << format_double(row.defect_norm) << ',' << row.M << ',' << row.status << '\n';
  }
}

namespace {

nlohmann::json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

nlohmann::json smallness_json(const SmallnessReport& s) {
  return {{"q_omega", number_or_null(s.q_omega)}, {"q_inf", number_or_null(s.q_inf)},
          {"q_phi", number_or_null(s.q_phi)},     {"z_cond", number_or_null(s.z_cond)},
          {"c_omega", number_or_null(s.c_omega)}, {"c_phi", number_or_null(s.c_phi)},
          {"all_small", s.all_small()}};
}

}  // namespace

std::string summary_json(const SweepResult& r, const SweepConfig& cfg, int indent) {
  nlohmann::json j;
  j["config_hash"] = hex64(config_hash(cfg));
  j["potential"] = cfg.potential.canonical();
  j["rho"] = cfg.rho;
  j["N_list"] = cfg.N_list;
  j["grid"] = {{"nodes_per_wavelength", cfg.grid.nodes_per_wavelength},
               {"nodes_per_panel", cfg.grid.nodes_per_panel},
               {"support_refinement", cfg.grid.support_refinement}};
  j["tolerances"] = {{"ode", cfg.tol.ode}, {"root", cfg.tol.root}, {"scattering", cfg.tol.scattering}};
  j["gamma_fit"] = number_or_null(r.gamma_fit);
  j["c_fit"] = number_or_null(r.c_fit);
  j["fit_ok"] = r.fit_ok;
  j["fit_N"] = r.fit_N;
  const auto& g = r.gamma;
  j["nu"] = g.nu;
  j["gamma_scattering"] = g.scattering;
  j["gamma_matrix"] = g.matrix;
  j["gamma_gkm"] = g.gkm;
  j["gamma_matrix_self_convergence"] = g.matrix_self_convergence;
  j["gamma_route_mismatch"] = g.route_mismatch;
  j["unitarity_defect"] = g.unitarity_defect;
  if (g.scattering > 0.0 && r.fit_ok) j["gamma_fit_relative_error"] = std::abs(r.gamma_fit - g.scattering) / g.scattering;
  j["smallness"] = smallness_json(g.smallness);
  j["residuals"] = r.residuals;
  if (!r.residuals.empty()) {
    auto [lo, hi] = std::minmax_element(r.residuals.begin(), r.residuals.end());
    j["residual_spread"] = *hi - *lo;
  }
  int failed = 0;
  for (const auto& row : r.rows) failed += row.ok() ? 0 : 1;
  j["failed_rows"] = failed;
  return j.dump(indent);
}

}  // namespace aoc
