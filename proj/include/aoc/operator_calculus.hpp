#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aoc/core_model.hpp"
#include "aoc/nystrom.hpp"

namespace aoc {

struct SignOperator {
  std::vector<double> diag;
};

/// sign(V(x_i)) with sign(0) = +1.
SignOperator sign_operator(const Potential& V, const Grid& grid);

struct SmallnessReport {
  double q_omega = 0.0;
  double q_inf = 0.0;
  double q_phi = 0.0;
  double z_cond = 0.0;
  /// 1 / (1 - q), infinite when q >= 1
  double c_omega = 0.0;
  double c_phi = 0.0;

  bool all_small() const { return q_omega < 1.0 && q_inf < 1.0 && q_phi < 1.0 && z_cond < 1.0; }
};

SmallnessReport smallness_report(double l1_norm, double nu);
SmallnessReport smallness_report(const Potential& V, double nu);

/// Grid restricted to the support of V; the input grid must have boundaries at +-a.
Grid restrict_to_support(const Potential& V, const Grid& grid);

NystromOperator birman_schwinger(cplx z, const Potential& V, const Grid& grid, double L);
/// Same with z = q^2 given through its root.
NystromOperator birman_schwinger_root(cplx q, const Potential& V, const Grid& grid, double L);

struct OmegaResult {
  NystromOperator omega;
  double rcond = 0.0;
  double norm = 0.0;
  /// 1 / (1 - q_omega) when q_omega < 1, else infinity
  double norm_bound = std::numeric_limits<double>::infinity();
  bool bound_ok = true;
  SmallnessReport smallness;
};

/// (1 - B J)^{-1}
OmegaResult omega_operator(cplx z, const Potential& V, const Grid& grid, double L);

/// Matrix of T = sqrt|V| J Omega sqrt|V| acting on nodal values of the support grid.
Eigen::MatrixXcd t_matrix(const OmegaResult& omega, const SignOperator& J, const Potential& V);

struct PhiHat {
  Eigen::Matrix2cd matrix;
  double self_adjoint_defect = 0.0;
  double entry_bound = std::numeric_limits<double>::infinity();
  SmallnessReport smallness;
};

PhiHat phi_hat(double nu, const Potential& V, const Grid& grid);

struct GammaMatrixResult {
  double gamma = 0.0;
  PhiHat phi;
};

GammaMatrixResult gamma_matrix_report(double nu, const Potential& V, const Grid& grid);
double gamma_matrix(double nu, const Potential& V, const Grid& grid);

enum class SquaredResolventRoute { closed_form, spectral_series };

struct ContourOptions {
  /// 0 starts at max(10 / L, 5) and doubles until the tail estimate is below tol
  double s_cut = 0.0;
  double tol = 1e-8;
  int nodes_per_panel = 12;
  int max_refinements = 4;
  SquaredResolventRoute route = SquaredResolventRoute::closed_form;
  int workers = 1;
};

struct ContourResult {
  double value = 0.0;
  double s_cut = 0.0;
  double tail_estimate = 0.0;
  /// |difference| between the last two quadrature refinements
  double quadrature_error = 0.0;
  std::size_t evaluations = 0;
};

/// Integrand (2/pi) Re[tr(P_N R T R^2 T)(z(s)) (sqrt(nu) + i s)] on the Fermi parabola.
double contour_integrand(int N, const Potential& V, double L, const Grid& support, double s,
                         SquaredResolventRoute route = SquaredResolventRoute::closed_form,
                         double series_tol = 1e-12);

ContourResult contour_anderson_report(int N, const Potential& V, double L, const Grid& grid,
                                      const ContourOptions& opt = {});
double contour_anderson(int N, const Potential& V, double L, const Grid& grid, double s_cut, double tol);

struct AuditItem {
  std::string name;
  double s = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  /// 1 - lhs / rhs (relative slack), or rhs - lhs for log-space items
  double margin = 0.0;
};

struct AuditReport {
  std::vector<AuditItem> items;
  bool all_pass() const;
};

struct AuditSamples {
  std::vector<double> s{0.0, 0.1, 1.0, 5.0};
  int sum_check_max = 500;
};

/// Anderson integral and log transition probability of one instance.
struct AndersonPair {
  double anderson_integral = 0.0;
  double ln_transition = 0.0;
};

AuditReport bounds_audit(const Potential& V, int N, double L, const Grid& grid, const AuditSamples& samples = {},
                         std::optional<AndersonPair> anderson = std::nullopt);

}  // namespace aoc
