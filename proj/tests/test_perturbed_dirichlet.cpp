#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "aoc/core_model.hpp"
#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/perturbed_dirichlet.hpp"
#include "doctest.h"

using namespace aoc;
using std::numbers::pi;

namespace {

// Exact propagation of (psi, psi') across a region of constant potential v.
void propagate(double mu, double v, double h, double& p, double& dp) {
  double e = mu - v;
  if (e > 0.0) {
    double k = std::sqrt(e), c = std::cos(k * h), s = std::sin(k * h);
    double np = p * c + dp / k * s;
    dp = -p * k * s + dp * c;
    p = np;
  } else if (e < 0.0) {
    double b = std::sqrt(-e), c = std::cosh(b * h), s = std::sinh(b * h);
    double np = p * c + dp / b * s;
    dp = p * b * s + dp * c;
    p = np;
  } else {
    p += dp * h;
  }
}

// psi(x; mu) for the square well, psi(-L) = 0, psi'(-L) = 1
double well_solution(double mu, double v0, double a, double L, double x) {
  double p = 0.0, dp = 1.0;
  double pos = -L;
  for (auto [edge, v] : {std::pair{-a, 0.0}, std::pair{a, v0}, std::pair{L, 0.0}}) {
    double end = std::min(edge, x);
    if (end > pos) propagate(mu, v, end - pos, p, dp);
    pos = std::max(pos, end);
  }
  return p;
}

// Eigenvalues of the square well from sign changes of psi(L; mu), refined by TOMS 748.
std::vector<double> well_eigenvalues(int count, double v0, double a, double L) {
  std::vector<double> out;
  double lo = std::min(v0, 0.0) + 1e-9;
  double step = 1e-3 * pi * pi / (4.0 * L * L);
  double f_lo = well_solution(lo, v0, a, L, L);
  while (static_cast<int>(out.size()) < count) {
    double hi = lo + step;
    double f_hi = well_solution(hi, v0, a, L, L);
    if (f_lo == 0.0) {
      out.push_back(lo);
    } else if ((f_lo < 0.0) != (f_hi < 0.0)) {
      std::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve([&](double m) { return well_solution(m, v0, a, L, L); }, lo, hi,
                                                 f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), it);
      out.push_back(0.5 * (r.first + r.second));
    }
    lo = hi;
    f_lo = f_hi;
  }
  return out;
}

}  // namespace

TEST_CASE("free Prufer phase") {
  Potential V = Potential::zero();
  for (double L : {0.75, 5.25, 40.0}) {
    for (double mu : {1e-4, 0.3, 2.0, 17.0}) {
      CHECK(prufer_phase(mu, V, L, 1e-12) == doctest::Approx(2.0 * L * std::sqrt(mu)).epsilon(1e-11));
    }
    for (int k = 1; k <= 20; ++k)
      CHECK(prufer_phase(free_eigenvalue(k, L), V, L, 1e-12) == doctest::Approx(k * pi).epsilon(1e-11));
  }
  CHECK_THROWS_AS(prufer_phase(0.0, V, 1.0, 1e-10), DomainError);
  CHECK_THROWS_AS(prufer_phase(-1.0, V, 1.0, 1e-10), DomainError);
}

TEST_CASE("free eigenvalues from the phase") {
  Potential V = Potential::zero();
  for (double L : {0.75, 10.25}) {
    auto mu = perturbed_spectrum(20, V, L);
    for (int k = 1; k <= 20; ++k) CHECK(mu[k - 1] == doctest::Approx(free_eigenvalue(k, L)).epsilon(1e-12));
  }
}

TEST_CASE("square well eigenvalues against exact propagation") {
  for (double v0 : {-0.5, 0.5, -3.0, 2.0}) {
    for (double L : {1.5, 5.25}) {
      auto exact = well_eigenvalues(20, v0, 1.0, L);
      auto mu = perturbed_spectrum(20, Potential::square_well(v0, 1.0), L);
      for (int k = 0; k < 20; ++k) {
        INFO("v0=" << v0 << " L=" << L << " k=" << k + 1);
        CHECK(std::abs(mu[k] - exact[k]) <= 1e-10 * std::max(1.0, std::abs(exact[k])));
      }
    }
  }
}

TEST_CASE("phase monotone in mu and its derivative") {
  Potential V = Potential::square_well(-0.5, 1.0);
  double L = 5.25;
  double prev = -1.0;
  for (double mu = -0.4; mu < 5.0; mu += 0.173) {
    auto t = prufer_phase(mu, V, L);
    CHECK(t.theta_final > prev);
    CHECK(t.dtheta_dmu > 0.0);
    prev = t.theta_final;
    double h = 1e-5 * std::max(1.0, std::abs(mu));
    double fd = (prufer_phase(mu + h, V, L).theta_final - prufer_phase(mu - h, V, L).theta_final) / (2 * h);
    CHECK(t.dtheta_dmu == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("Gaussian well: Born ratio and phase counting") {
  double L = 4.25;
  Potential V = Potential::gaussian_truncated(1.0, 0.4, 1.5);
  Grid g = build_grid(L, 10.0, V);
  for (int k : {1, 2, 5}) {
    std::vector<double> phi(g.size()), Vphi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      phi[i] = free_eigenfunction(k, L, g.nodes()[i]);
      Vphi[i] = V(g.nodes()[i]) * phi[i];
    }
    double first = inner_product(phi, Vphi, g);
    double c1 = 1e-3, c2 = 5e-4;
    double r1 = (perturbed_eigenvalue(k, V.scaled(c1), L) - free_eigenvalue(k, L)) / c1;
    double r2 = (perturbed_eigenvalue(k, V.scaled(c2), L) - free_eigenvalue(k, L)) / c2;
    // r(c) = first + O(c)
    CHECK(std::abs(r2 - first) <= 0.6 * std::abs(r1 - first) + 1e-7);
    CHECK(std::abs(r2 - first) <= 1e-3 * std::abs(first));
  }
  auto mu = perturbed_spectrum(12, V, L);
  for (int k = 1; k <= 12; ++k) {
    double below = k == 1 ? mu[0] - 0.5 : 0.5 * (mu[k - 2] + mu[k - 1]);
    CHECK(count_below(below, V, L) == k - 1);
  }
}

TEST_CASE("nonnegative potentials raise eigenvalues") {
  for (auto V : {Potential::square_well(0.5, 1.0), Potential::gaussian_truncated(2.0, 0.3, 1.0)}) {
    double L = 6.0;
    auto mu = perturbed_spectrum(25, V, L);
    for (int k = 1; k <= 25; ++k) {
      CHECK(mu[k - 1] >= free_eigenvalue(k, L));
      CHECK(mu[k - 1] <= free_eigenvalue(k, L) + V.analytic_sup());
    }
  }
}

TEST_CASE("eigenfunctions: free case, closed form, orthonormality") {
  SUBCASE("free") {
    double L = 3.25;
    Potential V = Potential::zero();
    Grid g = build_grid(L, 10.0, V);
    for (int k = 1; k <= 8; ++k) {
      auto e = perturbed_eigenfunction(k, free_eigenvalue(k, L), V, g);
      double err = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(e.psi[i] - free_eigenfunction(k, L, g.nodes()[i]) *
                                                   (free_eigenfunction(k, L, -L + 1e-6) > 0 ? 1 : -1)));
      CHECK(err < 1e-8);
    }
  }
  SUBCASE("square wells") {
    for (double v0 : {-0.5, 0.5}) {
      double L = 25.25;
      Potential V = Potential::square_well(v0, 1.0);
      Grid g = build_grid(L, 4.0, V);
      auto mu = perturbed_spectrum(10, V, L);
      std::vector<PerturbedEigenpair> ps;
      for (int k = 1; k <= 10; ++k) ps.push_back(perturbed_eigenfunction(k, mu[k - 1], V, g));
      for (int j = 0; j < 10; ++j) {
        CHECK(ps[j].dirichlet_residual < 1e-8);
        // closed-form shape, normalized by its own quadrature
        std::vector<double> ref(g.size());
        // propagate towards the middle only and use parity for x > 0
        double parity = j % 2 == 0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          double x = g.nodes()[i];
          ref[i] = x <= 0.0 ? well_solution(mu[j], v0, 1.0, L, x) : parity * well_solution(mu[j], v0, 1.0, L, -x);
        }
        double n = std::sqrt(inner_product(ref, ref, g));
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(ps[j].psi[i] - ref[i] / n));
        INFO("v0=" << v0 << " k=" << j + 1);
        CHECK(err < 1e-8);
        for (int k = 0; k < 10; ++k)
          CHECK(std::abs(inner_product(ps[j].psi, ps[k].psi, g) - (j == k ? 1.0 : 0.0)) < 1e-9);
      }
    }
  }
}

TEST_CASE("exterior representation matches the samples") {
  double L = 7.0;
  Potential V = Potential::square_well(-2.0, 1.0);
  Grid g = build_grid(L, 4.0, V);
  auto mu = perturbed_spectrum(4, V, L);
  CHECK(mu[0] < 0.0);
  for (int k = 1; k <= 4; ++k) {
    auto e = perturbed_eigenfunction(k, mu[k - 1], V, g);
    CHECK(std::abs(e.left(0.0)) < 1e-14);
    CHECK(std::abs(e.right(0.0)) < 1e-14);
    // continuity at the support edges
    double inner = well_solution(mu[k - 1], -2.0, 1.0, L, 1.0) / well_solution(mu[k - 1], -2.0, 1.0, L, -1.0);
    CHECK(e.right(L - 1.0).real() / e.left(L - 1.0).real() == doctest::Approx(inner).epsilon(1e-8));
  }
  CHECK_THROWS_AS(perturbed_eigenfunction(1, mu[0], V, build_grid(L, 16, 4.0, Interval{-0.55, 0.55})),
                  ConfigError);
}

TEST_CASE("counting") {
  Potential Z = Potential::zero();
  for (int N : {1, 10, 50}) {
    double L = (N + 0.5) / 2.0;
    CHECK(count_below(fermi_energy(N, L), Z, L) == N);
  }
  CHECK_THROWS_AS(count_below(free_eigenvalue(3, 2.0), Z, 2.0), AmbiguityError);

  // direct counting agrees with the phase
  Potential V = Potential::square_well(-0.5, 1.0);
  double L = 10.25;
  auto mu = perturbed_spectrum(30, V, L);
  for (double E : {-0.1, 0.05, 0.5, 2.0, 5.0}) {
    int direct = 0;
    for (double m : mu) direct += m < E ? 1 : 0;
    CHECK(count_below(E, V, L) == direct);
  }
  // monotone in V
  double E = fermi_energy(20, L);
  int m_minus = count_below(E, Potential::square_well(-0.5, 1.0), L);
  int m_plus = count_below(E, Potential::square_well(0.5, 1.0), L);
  CHECK(m_minus >= count_below(E, Z, L));
  CHECK(count_below(E, Z, L) >= m_plus);
}

TEST_CASE("counting bounds bracket the count") {
  for (double v0 : {-0.5, 0.5}) {
    Potential V = Potential::square_well(v0, 1.0);
    for (int N : {10, 50}) {
      double L = (N + 0.5) / 2.0;
      double E = fermi_energy(N, L);
      int M = count_below(E, V, L);
      double c = minimal_c_alpha(V, 1.0);
      double upper = bargmann_upper_bound(E, V, 1.0, c, L);
      double lower = counting_lower_bound(E, V, L);
      CHECK(M <= std::ceil(upper));
      CHECK(M >= std::floor(lower));
      double l1p = potential_norms(V).l1_plus;
      CHECK(lower == doctest::Approx(N - 0.5 - 2.0 * l1p / (pi * std::sqrt(E))).epsilon(1e-12));
      auto mu = perturbed_spectrum(N, V, L);
      for (int k = 1; k <= N; ++k)
        if (mu[k - 1] > 0.0) CHECK(std::sqrt(mu[k - 1]) <= k * pi / (2 * L) + l1p / (k * pi));
    }
  }
  Potential Z = Potential::zero();
  CHECK(bargmann_upper_bound(4.0, Z, 1.0, 0.0, 3.0) == doctest::Approx(2 * 3.0 / pi * 2.0));
  CHECK(counting_lower_bound(4.0, Z, 3.0) == doctest::Approx(2 * 3.0 / pi * 2.0 - 1.0));
  Potential W = Potential::square_well(-1.0, 1.0);
  CHECK_THROWS_AS(bargmann_upper_bound(1.0, W, 1.0, 0.5, 3.0), DomainError);
  CHECK(minimal_c_alpha(W, 1.0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK_THROWS_AS(counting_lower_bound(1e-3, Potential::square_well(1.0, 1.0), 3.0), DomainError);
}
