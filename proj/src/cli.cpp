#include "aoc/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "aoc/anderson_metrics.hpp"
#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/operator_calculus.hpp"
#include "aoc/parallel.hpp"
#include "aoc/perturbed_dirichlet.hpp"
#include "aoc/scattering.hpp"
#include "aoc/sweep.hpp"

namespace aoc {
namespace {

using nlohmann::json;

struct PotentialFlags {
  std::string family = "square_well";
  double v0 = 0.0;
  double a = 1.0;
  double sigma = 0.5;
  std::vector<double> x, v;
  CLI::Option* v0_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--potential", family, "square_well, gaussian_truncated or table");
    v0_opt = app->add_option("--v0", v0, "well depth (negative attracts)");
    app->add_option("--a", a, "support half width");
    app->add_option("--sigma", sigma, "Gaussian width");
    app->add_option("--table-x", x, "table abscissae")->delimiter(',');
    app->add_option("--table-v", v, "table values")->delimiter(',');
  }

  PotentialSpec spec() const {
    PotentialSpec s;
    s.family = parse_family(family);
    s.v0 = v0;
    s.a = a;
    s.sigma = sigma;
    s.table_x = x;
    s.table_v = v;
    return s;
  }
};

struct SystemFlags {
  int N = 10;
  double rho = 1.0;
  double L = 0.0;

  void add(CLI::App* app) {
    app->add_option("--N", N, "particle number")->check(CLI::PositiveNumber);
    app->add_option("--rho", rho, "density (N + 1/2) / 2L")->check(CLI::PositiveNumber);
    app->add_option("--L", L, "box half length; overrides --rho")->check(CLI::PositiveNumber);
  }

  SystemConfig system() const { return L > 0.0 ? SystemConfig::from_box(N, L) : SystemConfig::from_density(rho, N); }
};

std::string num(double x) { return format_double(x); }

void print_smallness(std::ostream& out, const SmallnessReport& s) {
  out << "smallness q_omega=" << num(s.q_omega) << " q_inf=" << num(s.q_inf) << " q_phi=" << num(s.q_phi)
      << " z_cond=" << num(s.z_cond) << (s.all_small() ? " (all < 1)" : " (warning: some >= 1)") << '\n';
}

int run_spectrum(const PotentialFlags& pf, const SystemFlags& sf, int kmax, double energy, int workers,
                 std::ostream& out) {
  Potential V = pf.spec().make();
  auto sys = sf.system();
  double E = energy > 0.0 ? energy : sys.nu;
  EigenOptions opt;
  auto mu = perturbed_spectrum(kmax, V, sys.L, opt, workers);
  double l1p = potential_norms(V).l1_plus;
  out << "# " << V.describe() << " L=" << num(sys.L) << '\n';
  out << "k,lambda,mu,sqrt_mu_bound,bound_ok\n";
  for (int k = 1; k <= kmax; ++k) {
    double lam = free_eigenvalue(k, sys.L);
    double bound = k * std::numbers::pi / (2.0 * sys.L) + l1p / (k * std::numbers::pi);
    double m = mu[k - 1];
    bool ok = m <= 0.0 || std::sqrt(m) <= bound;
    out << k << ',' << num(lam) << ',' << num(m) << ',' << num(bound) << ',' << (ok ? "yes" : "no") << '\n';
  }
  out << "E=" << num(E) << '\n';
  try {
    out << "count_below=" << count_below(E, V, sys.L) << '\n';
  } catch (const AmbiguityError& e) {
    out << "count_below=undecided (" << e.what() << ")\n";
  }
  try {
    out << "counting_lower_bound=" << num(counting_lower_bound(E, V, sys.L)) << '\n';
  } catch (const DomainError& e) {
    out << "counting_lower_bound=n/a (" << e.what() << ")\n";
  }
  double c = minimal_c_alpha(V, 1.0);
  out << "bargmann_upper_bound=" << num(bargmann_upper_bound(E, V, 1.0, c, sys.L)) << " (alpha=1, c_alpha="
      << num(c) << ")\n";
  return 0;
}

int run_gamma(const PotentialFlags& pf, double nu, double rho, const GridOptions& grid, bool as_json,
              std::ostream& out) {
  Potential V = pf.spec().make();
  if (!(nu > 0.0)) nu = std::pow(std::numbers::pi * rho, 2);
  auto g = gamma_report(V, nu, grid);
  if (as_json) {
    json j = {{"nu", nu},
              {"gamma_scattering", g.scattering},
              {"gamma_matrix", g.matrix},
              {"gamma_gkm", g.gkm},
              {"matrix_vs_scattering", std::abs(g.matrix - g.scattering)},
              {"gkm_vs_scattering", std::abs(g.gkm - g.scattering)},
              {"matrix_vs_gkm", std::abs(g.matrix - g.gkm)},
              {"matrix_self_convergence", g.matrix_self_convergence},
              {"route_mismatch", g.route_mismatch},
              {"unitarity_defect", g.unitarity_defect}};
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "# " << V.describe() << " nu=" << num(nu) << '\n';
  out << "gamma_scattering=" << num(g.scattering) << '\n';
  out << "gamma_matrix=" << num(g.matrix) << '\n';
  out << "gamma_gkm=" << num(g.gkm) << '\n';
  out << "|matrix-scattering|=" << num(std::abs(g.matrix - g.scattering)) << '\n';
  out << "|gkm-scattering|=" << num(std::abs(g.gkm - g.scattering)) << '\n';
  out << "|matrix-gkm|=" << num(std::abs(g.matrix - g.gkm)) << '\n';
  out << "matrix_self_convergence=" << num(g.matrix_self_convergence) << '\n';
  if (g.route_mismatch) out << "warning: matrix and scattering routes disagree beyond the grid error\n";
  print_smallness(out, g.smallness);
  return 0;
}

int run_anderson(const PotentialFlags& pf, const SystemFlags& sf, const GridOptions& grid, bool contour,
                 int workers, bool as_json, std::ostream& out) {
  Potential V = pf.spec().make();
  auto sys = sf.system();
  AndersonOptions opt;
  opt.workers = workers;
  Grid g = anderson_grid(sys.N, V, sys.L, grid);
  auto r = anderson_metrics(sys.N, V, sys.L, g, opt);
  json j = {{"N", r.N},
            {"L", r.L},
            {"nu", sys.nu},
            {"anderson_integral", r.anderson_integral},
            {"anderson_integral_trace", r.anderson_integral_trace},
            {"transition_probability", r.transition_probability},
            {"ln_transition", r.ln_transition},
            {"ln_transition_spectral", r.ln_transition_spectral},
            {"defect_norm", r.defect_norm},
            {"M", r.M},
            {"count_mismatch", r.count_mismatch},
            {"anderson_margin", -r.anderson_integral - r.ln_transition},
            {"sandwich_ok", r.bounds.sandwich_ok},
            {"theorem_ok", r.bounds.theorem_ok}};
  if (r.bounds.lower_defined) j["ln_lower"] = r.bounds.ln_lower;
  if (!r.bounds.theorem_vacuous) j["theorem_bound"] = r.bounds.theorem_bound;
  if (contour) {
    ContourOptions copt;
    copt.workers = workers;
    auto c = contour_anderson_report(sys.N, V, sys.L, g, copt);
    j["contour"] = {{"value", c.value},
                    {"difference", std::abs(c.value - r.anderson_integral)},
                    {"s_cut", c.s_cut},
                    {"tail_estimate", c.tail_estimate},
                    {"quadrature_error", c.quadrature_error}};
    if (r.M != sys.N) j["contour"]["note"] = "count_below(nu_N) != N; the contour route targets the M-state projection";
  }
  if (as_json) {
    out << j.dump(2) << '\n';
  } else {
    for (const auto& [k, v] : j.items()) {
      if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) out << k << '.' << k2 << '=' << v2.dump() << '\n';
      } else {
        out << k << '=' << v.dump() << '\n';
      }
    }
  }
  return 0;
}

int run_audit(const PotentialFlags& pf, const SystemFlags& sf, const GridOptions& grid, bool with_anderson,
              std::ostream& out) {
  Potential V = pf.spec().make();
  auto sys = sf.system();
  Grid g = anderson_grid(sys.N, V, sys.L, grid);
  std::optional<AndersonPair> pair;
  if (with_anderson) {
    auto r = anderson_metrics(sys.N, V, sys.L, g);
    pair = AndersonPair{r.anderson_integral, r.ln_transition};
  }
  auto rep = bounds_audit(V, sys.N, sys.L, g, {}, pair);
  for (const auto& it : rep.items) {
    out << (it.pass ? "PASS " : "FAIL ") << it.name << " s=" << num(it.s) << " lhs=" << num(it.lhs)
        << " rhs=" << num(it.rhs) << " margin=" << num(it.margin) << '\n';
  }
  out << (rep.all_pass() ? "all inequalities hold" : "some inequalities fail") << '\n';
  return 0;
}

int run_sweep_cmd(SweepConfig cfg, std::ostream& out, std::ostream& err) {
  cfg.validate();
  auto res = run_sweep(cfg);
  print_smallness(err, res.gamma.smallness);
  if (cfg.csv_path.empty()) {
    write_csv(res, out);
  } else {
    std::ofstream f(cfg.csv_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + cfg.csv_path + "'");
    write_csv(res, f);
  }
  std::string summary = summary_json(res, cfg);
  if (cfg.json_path.empty()) {
    out << summary << '\n';
  } else {
    std::ofstream f(cfg.json_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + cfg.json_path + "'");
    f << summary << '\n';
  }
  for (const auto& row : res.rows)
    if (!row.ok()) err << "N=" << row.N << ' ' << row.status << '\n';
  err << "gamma_fit=" << format_double(res.gamma_fit) << " gamma_scattering=" << format_double(res.gamma.scattering)
      << '\n';
  if (!res.fit_ok) {
    err << "slope fit needs at least three successful rows in the fit window\n";
    return 1;
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anderson orthogonality toolkit: spectra, gamma routes, overlaps and sweeps", "aoc"};
  app.require_subcommand(1);
  int workers = workers_from_env(1);
  GridOptions grid;
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--npw", grid.nodes_per_wavelength, "grid nodes per wavelength");
    sub->add_option("--npp", grid.nodes_per_panel, "Gauss nodes per panel");
    sub->add_option("--support-refinement", grid.support_refinement, "panel subdivision on the support");
  };

  PotentialFlags pf;
  SystemFlags sf;

  auto* spectrum = app.add_subcommand("spectrum", "free and perturbed Dirichlet eigenvalues with counting bounds");
  pf.add(spectrum);
  sf.add(spectrum);
  int kmax = 10;
  double energy = 0.0;
  spectrum->add_option("--kmax", kmax, "number of eigenvalues")->check(CLI::PositiveNumber);
  spectrum->add_option("--E", energy, "counting energy (default nu_N)");
  spectrum->add_option("--workers", workers, "threads (default AOC_WORKERS or 1)");

  auto* gamma = app.add_subcommand("gamma", "gamma(nu) by scattering, matrix and S-matrix routes");
  PotentialFlags pg;
  pg.add(gamma);
  double nu = 0.0, rho_g = 1.0;
  bool as_json = false;
  gamma->add_option("--nu", nu, "energy")->check(CLI::PositiveNumber);
  gamma->add_option("--rho", rho_g, "density; nu = (pi rho)^2")->check(CLI::PositiveNumber);
  gamma->add_flag("--json", as_json, "print JSON");
  add_grid(gamma);

  auto* anderson = app.add_subcommand("anderson", "overlap, Anderson integral and transition probability");
  PotentialFlags pa;
  SystemFlags sa;
  pa.add(anderson);
  sa.add(anderson);
  bool contour = false;
  anderson->add_flag("--contour", contour, "cross-check through the contour integral");
  anderson->add_flag("--json", as_json, "print JSON");
  anderson->add_option("--workers", workers, "threads (default AOC_WORKERS or 1)");
  add_grid(anderson);

  auto* sweep = app.add_subcommand("sweep", "thermodynamic-limit sweep over N");
  std::string config_path;
  PotentialFlags ps;
  ps.add(sweep);
  double rho_s = 0.0;
  std::vector<int> N_list;
  std::string csv, json_out;
  sweep->add_option("--config", config_path, "INI/TOML-style config file");
  sweep->add_option("--rho", rho_s)->check(CLI::PositiveNumber);
  sweep->add_option("--N", N_list, "N values")->delimiter(',');
  sweep->add_option("--csv", csv, "CSV output path (default stdout)");
  sweep->add_option("--json", json_out, "JSON summary path (default stdout)");
  auto* sweep_workers = sweep->add_option("--workers", workers, "threads (default AOC_WORKERS or 1)");
  add_grid(sweep);

  auto* audit = app.add_subcommand("audit", "numerical check of the operator inequalities");
  PotentialFlags pu;
  SystemFlags su;
  pu.add(audit);
  su.add(audit);
  bool with_anderson = false;
  audit->add_flag("--anderson", with_anderson, "also check D <= exp(-I)");
  add_grid(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (grid.nodes_per_wavelength < 8) throw ConfigError("--npw must be >= 8");
    if (grid.nodes_per_panel < 2 || grid.nodes_per_panel > 64) throw ConfigError("--npp must lie in [2, 64]");
    if (grid.support_refinement < 1) throw ConfigError("--support-refinement must be >= 1");
    if (workers < 1) throw ConfigError("--workers must be >= 1");
    if (*spectrum) return run_spectrum(pf, sf, kmax, energy, workers, out);
    if (*gamma) return run_gamma(pg, nu, rho_g, grid, as_json, out);
    if (*anderson) return run_anderson(pa, sa, grid, contour, workers, as_json, out);
    if (*audit) return run_audit(pu, su, grid, with_anderson, out);
    if (*sweep) {
      SweepConfig cfg;
      if (!config_path.empty()) cfg = load_sweep_config(config_path);
      if (sweep->count("--potential") || sweep->count("--v0")) cfg.potential = ps.spec();
      if (sweep->count("--rho")) cfg.rho = rho_s;
      if (!N_list.empty()) cfg.N_list = N_list;
      if (!csv.empty()) cfg.csv_path = csv;
      if (!json_out.empty()) cfg.json_path = json_out;
      if (sweep_workers->count() || std::getenv("AOC_WORKERS")) cfg.workers = workers;
      if (sweep->count("--npw")) cfg.grid.nodes_per_wavelength = grid.nodes_per_wavelength;
      if (sweep->count("--npp")) cfg.grid.nodes_per_panel = grid.nodes_per_panel;
      if (sweep->count("--support-refinement")) cfg.grid.support_refinement = grid.support_refinement;
      return run_sweep_cmd(cfg, out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace aoc
