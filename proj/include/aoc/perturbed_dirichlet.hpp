#pragma once

#include <vector>

#include "aoc/core_model.hpp"
#include "aoc/ode.hpp"

namespace aoc {

struct PruferTrajectory {
  double mu = 0.0;
  double theta_final = 0.0;
  /// d theta(L, mu) / d mu
  double dtheta_dmu = 0.0;
  OdeStats stats;
};

struct EigenOptions {
  OdeTolerance ode{};
  /// Relative accuracy of the eigenvalue root.
  double root_tol = 1e-13;
  int max_iterations = 200;
  /// Initial bracket half width in units of ||V||_inf; widened geometrically on failure.
  double bracket_scale = 1.0;
  int max_widenings = 40;
};

/// Phase theta(L, mu) with theta(-L) = 0 and its mu-derivative.
PruferTrajectory prufer_phase(double mu, const Potential& V, double L, const OdeTolerance& tol = {});
/// Convenience form returning only theta(L, mu); tol is the ODE relative tolerance.
double prufer_phase(double mu, const Potential& V, double L, double tol);

/// k-th Dirichlet eigenvalue of -d^2/dx^2 + V on [-L, L].
double perturbed_eigenvalue(int k, const Potential& V, double L, const EigenOptions& opt = {});
double perturbed_eigenvalue(int k, const Potential& V, double L, double tol);

/// Eigenvalues 1..kmax.
std::vector<double> perturbed_spectrum(int kmax, const Potential& V, double L,
                                       const EigenOptions& opt = {}, int workers = 1);

/// Terms alpha * exp(c (d - d_ref)) of a function of the distance d to a wall.
struct ExpTerm {
  cplx alpha;
  cplx c;
  double d_ref = 0.0;
};

/// sum of ExpTerms on d in [0, D]; every term has modulus <= |alpha| there.
struct ExpSum {
  std::vector<ExpTerm> terms;
  double D = 0.0;

  cplx operator()(double d) const;
  /// integral over [0, D] of this * other
  cplx integrate_product(const ExpSum& other) const;
};

/// Free plane-wave expansion of phi_j on the left (sigma = +1) or right (sigma = -1) exterior,
/// with x = sigma (d - L).
ExpSum free_eigenfunction_expsum(int j, double L, int sigma, double D);

struct PerturbedEigenpair {
  int k = 1;
  double mu = 0.0;
  double L = 0.0;
  double a = 0.0;
  /// Normalized samples on the grid nodes.
  std::vector<double> psi;
  /// Sign of psi'(-L) after normalization (always +1).
  int boundary_sign = 1;
  /// Exact representation on [-L, -a] and [a, L] in the distance to the nearest wall.
  ExpSum left, right;
  /// Discarded non-Dirichlet component (mu > 0) or matching mismatch (mu <= 0), relative to max |psi|.
  double dirichlet_residual = 0.0;
  OdeStats stats;
};

PerturbedEigenpair perturbed_eigenfunction(int k, double mu_k, const Potential& V, const Grid& grid,
                                           const OdeTolerance& tol = {});

/// Number of eigenvalues below E, from the Prufer phase.
int count_below(double E, const Potential& V, double L, const OdeTolerance& tol = {});

/// Smallest c with |V_-(x)| <= c / (1 + |x|)^(alpha + 1) on a dense sample of the support.
double minimal_c_alpha(const Potential& V, double alpha);

double bargmann_upper_bound(double E, const Potential& V, double alpha, double c_alpha, double L);
double counting_lower_bound(double E, const Potential& V, double L);

}  // namespace aoc
