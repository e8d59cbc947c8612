#include <cmath>
#include <numbers>

#include "aoc/anderson_metrics.hpp"
#include "aoc/core_model.hpp"
#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/operator_calculus.hpp"
#include "doctest.h"

using namespace aoc;
using std::numbers::pi;

TEST_CASE("free problem") {
  for (int N : {1, 7, 20}) {
    double L = (N + 0.5) / 2.0;
    Potential Z = Potential::zero();
    Grid g = anderson_grid(N, Z, L);
    auto ov = overlap_matrix(N, Z, L, g);
    // psi_k'(-L) > 0 fixes the sign, phi_j keeps its trigonometric form
    Eigen::VectorXd sign(N);
    for (int j = 1; j <= N; ++j) sign(j - 1) = free_eigenfunction(j, L, -L + 1e-7) > 0.0 ? 1.0 : -1.0;
    CHECK((ov.A - Eigen::MatrixXd(sign.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-8);
    auto r = anderson_from_overlap(ov, Z, L);
    CHECK(std::abs(r.anderson_integral) <= 1e-10);
    CHECK(std::abs(r.transition_probability - 1.0) <= 1e-10);
    CHECK(r.M == N);
    CHECK(r.bounds.lower == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.bounds.upper == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.bounds.value == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("overlap matrix properties") {
  for (double v0 : {-0.5, 0.5, -2.0}) {
    int N = 20;
    double L = 10.25;
    Potential V = Potential::square_well(v0, 1.0);
    GridOptions o;
    auto ov = overlap_matrix(N, V, L, anderson_grid(N, V, L, o));
    CHECK(ov.max_row_norm2 <= 1.0 + 1e-8);
    CHECK(ov.A.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    o.nodes_per_wavelength = 8;
    o.support_refinement = 1;
    auto coarse = overlap_matrix(N, V, L, anderson_grid(N, V, L, o));
    CHECK((ov.A - coarse.A).cwiseAbs().maxCoeff() <= 1e-6);
  }
  CHECK_THROWS_AS(overlap_matrix(3, Potential::zero(), 2.0, build_grid(1.0, 16, 1.0, {0.0, 0.0})), ConfigError);
}

TEST_CASE("Parseval route against an extended basis") {
  int N = 10, K = N + 200;
  double L = 5.25;
  double v0 = -0.5;
  Potential V = Potential::square_well(v0, 1.0);
  Grid g = anderson_grid(K, V, L);
  auto ov = overlap_matrix(N, K, V, g);
  double direct = 0.0;
  for (int j = 0; j < N; ++j)
    for (int k = N; k < K; ++k) direct += ov.A(j, k) * ov.A(j, k);
  double parseval = anderson_integral(N, V, L, g);

  // (phi_j, psi_k) = (phi_j, V psi_k) / (mu_k - lambda_j), |psi_k| <= s / sqrt(L) with s from the samples
  double s = 0.0;
  for (int k = K - 20; k < K; ++k) {
    auto e = perturbed_eigenfunction(k + 1, ov.mu[k], V, g);
    for (double p : e.psi) s = std::max(s, std::abs(p) * std::sqrt(L));
  }
  s *= 1.5;
  double l1 = 2.0 * std::abs(v0);
  double vinf = std::abs(v0);
  double remainder = 0.0;
  for (int j = 1; j <= N; ++j) {
    double lj = free_eigenvalue(j, L);
    double c = l1 * s / L;
    long kmax = 2'000'000;
    for (long k = K + 1; k <= kmax; ++k) {
      double d = free_eigenvalue(static_cast<int>(k), L) - vinf - lj;
      remainder += c * c / (d * d);
    }
    // sum_{k > kmax} 1 / (a k^2 - b)^2 <= integral from kmax
    double a2 = pi * pi / (4 * L * L);
    remainder += c * c / (3.0 * a2 * a2 * std::pow(static_cast<double>(kmax) - 1.0, 3));
  }
  CHECK(direct <= parseval + 1e-12);
  CHECK(parseval - direct <= remainder);
  CHECK(parseval - direct >= 0.0);
}

TEST_CASE("Anderson quantities on square wells") {
  for (double v0 : {-0.5, 0.5, 0.1}) {
    for (int N : {10, 20}) {
      double L = (N + 0.5) / 2.0;
      Potential V = Potential::square_well(v0, 1.0);
      auto r = anderson_metrics(N, V, L);
      INFO("v0=" << v0 << " N=" << N);
      CHECK(r.anderson_integral > 0.0);
      CHECK(std::abs(r.anderson_integral - r.anderson_integral_trace) <= 1e-10);
      CHECK(std::abs(r.ln_transition - r.ln_transition_spectral) <= 1e-8 * std::abs(r.ln_transition));
      CHECK(r.transition_probability > 0.0);
      CHECK(r.transition_probability <= 1.0);
      CHECK(r.ln_transition <= -r.anderson_integral);
      CHECK(r.defect_norm >= 0.0);
      CHECK(r.defect_norm < 1.0);
      CHECK(r.bounds.lower_defined);
      CHECK(r.bounds.ln_lower < r.ln_transition);
      CHECK(r.ln_transition < -r.anderson_integral);
      CHECK(r.bounds.sandwich_ok);
      CHECK(r.M == N);
    }
  }
}

TEST_CASE("defect norm against the theorem bound") {
  for (double v0 : {0.1, -0.1, 0.2}) {
    int N = 20;
    double L = 10.25;
    Potential V = Potential::square_well(v0, 1.0);
    auto r = anderson_metrics(N, V, L);
    double nu = fermi_energy(N, L);
    auto sm = smallness_report(V, nu);
    REQUIRE(sm.q_omega < 1.0);
    CHECK_FALSE(r.bounds.theorem_vacuous);
    CHECK(r.bounds.theorem_bound == doctest::Approx(16.0 * sm.c_omega * 2.0 * std::abs(v0) / std::sqrt(nu)));
    CHECK(r.defect_norm <= r.bounds.theorem_bound);
    CHECK(r.bounds.theorem_ok);
  }
}

TEST_CASE("Anderson integral grows with the coupling") {
  int N = 20;
  double L = 10.25;
  double prev = 0.0;
  for (double c : {0.1, 0.2, 0.4}) {
    double I = anderson_metrics(N, Potential::square_well(-c, 1.0), L).anderson_integral;
    CHECK(I > prev);
    prev = I;
  }
}
