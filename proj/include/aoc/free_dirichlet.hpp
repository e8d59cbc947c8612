#pragma once

#include <complex>

#include "aoc/core_model.hpp"

namespace aoc {

enum class Parity { even, odd };

struct FreeEigenpair {
  int j = 1;
  double lambda = 0.0;
  /// Parity of the eigenfunction in x: odd j gives cos (even), even j gives sin (odd).
  Parity parity = Parity::even;
  double L = 1.0;

  double operator()(double x) const;
};

FreeEigenpair free_eigenpair(int j, double L);
double free_eigenvalue(int j, double L);
double free_eigenfunction(int j, double L, double x);
/// Fermi energy [pi (N + 1/2) / 2L]^2.
double fermi_energy(int N, double L);

/// z(s) = (sqrt(nu) + i s)^2 on the Fermi parabola.
struct FermiContourPoint {
  double s = 0.0;
  cplx root;
  cplx z;
  cplx dz_ds;
};

FermiContourPoint fermi_point(double nu, double s);

/// Dirichlet resolvent kernel (z - H_0)^{-1}(x, y) on [-L, L].
cplx green_kernel(cplx z, double x, double y, double L);
/// Same, parametrized by a root q with q^2 = z (either sign).
cplx green_kernel_root(cplx q, double x, double y, double L);

/// Kernel of R(z)^2 = -dR/dz, closed form.
cplx green_kernel_squared(cplx z, double x, double y, double L);
cplx green_kernel_squared_root(cplx q, double x, double y, double L);

struct SeriesValue {
  cplx value;
  int terms = 0;
  double tail_bound = 0.0;
};

/// Eigenfunction series for R(z)^2 truncated once the tail bound drops below tol.
SeriesValue green_kernel_squared_series(cplx z, double x, double y, double L, double tol);

/// Kernel of the commutator [X, R(z)] weighted as in the delta-term decomposition.
cplx commutator_kernel(cplx z, double x, double y, double L);
cplx commutator_kernel_root(cplx q, double x, double y, double L);

/// Boundary ("delta") term D(z)(x, y).
cplx delta_term_kernel(cplx z, double x, double y, double L);
cplx delta_term_kernel_root(cplx q, double x, double y, double L);

/// sum_{j <= N} phi_j(x) phi_j(y) / (z - lambda_j)
cplx truncated_resolvent_direct(int N, cplx z, double x, double y, double L);

struct TruncatedResolventParts {
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  double S0 = 0.0;
  double S0_tilde = 0.0;
  double S1 = 0.0;
  double S1_tilde = 0.0;
  double value = 0.0;
};

/// Laplace-type decomposition of the truncated resolvent for real z with sqrt(z) > pi N / 2L.
TruncatedResolventParts truncated_resolvent_decomposed(int N, double z, double x, double y, double L);

/// int_0^inf exp(-zt t) sinh(M t) / sinh(t/2) dt with M = N + 1/2, requires zt > N.
double kappa_integral(int N, double z_tilde);
/// Same with cosh(M t) / cosh(t/2).
double kappa_tilde_integral(int N, double z_tilde);
/// Values at the Fermi energy (zt = N + 1/2).
double kappa_n(int N);
double kappa_tilde_n(int N);

/// (cosh s - i sinh s) / (cosh s + i sinh s)
cplx tau(double s);

/// Root of z with Im >= 0.
cplx upper_root(cplx z);

}  // namespace aoc
