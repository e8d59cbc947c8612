#include <cmath>
#include <complex>
#include <numbers>

#include "aoc/anderson_metrics.hpp"
#include "aoc/core_model.hpp"
#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/nystrom.hpp"
#include "aoc/operator_calculus.hpp"
#include "aoc/scattering.hpp"
#include "doctest.h"

using namespace aoc;
using std::numbers::pi;

namespace {

// Exact transfer of (u, u') across constant potential v at complex energy z.
void propagate(cplx z, double v, double h, cplx& u, cplx& du) {
  cplx k = std::sqrt(z - v);
  if (std::abs(k) < 1e-12) {
    u += du * h;
    return;
  }
  cplx c = std::cos(k * h), s = std::sin(k * h);
  cplx nu = u * c + du / k * s;
  du = -u * k * s + du * c;
  u = nu;
}

// Dirichlet solution from the wall at `from` (u = 0, u' = 1) evaluated at x.
cplx wall_solution(cplx z, double v0, double a, double L, double from, double x) {
  cplx u = 0.0, du = 1.0;
  auto pot = [&](double t) { return std::abs(t) < a ? v0 : 0.0; };
  std::vector<double> edges;
  if (from < 0) {
    for (double e : {-a, a, L})
      if (e <= x) edges.push_back(e);
    edges.push_back(x);
    double pos = from;
    for (double e : edges) {
      if (e > pos) propagate(z, pot(0.5 * (pos + e)), e - pos, u, du);
      pos = std::max(pos, e);
    }
  } else {
    for (double e : {a, -a, -L})
      if (e >= x) edges.push_back(e);
    edges.push_back(x);
    double pos = from;
    for (double e : edges) {
      if (e < pos) propagate(z, pot(0.5 * (pos + e)), e - pos, u, du);
      pos = std::min(pos, e);
    }
  }
  return u;
}

// (z - H_V)^{-1}(x, y) for the square well from the two wall solutions.
cplx perturbed_green(cplx z, double v0, double a, double L, double x, double y) {
  double lo = std::min(x, y), hi = std::max(x, y);
  // Wronskian at an exterior point
  double m = -L + 0.5 * (L - a);
  double h = 1e-4;
  auto ul = [&](double t) { return wall_solution(z, v0, a, L, -L, t); };
  auto ur = [&](double t) { return wall_solution(z, v0, a, L, L, t); };
  cplx dl = (ul(m + h) - ul(m - h)) / (2 * h), dr = (ur(m + h) - ur(m - h)) / (2 * h);
  // refine the derivatives with Richardson extrapolation
  cplx dl2 = (ul(m + h / 2) - ul(m - h / 2)) / h, dr2 = (ur(m + h / 2) - ur(m - h / 2)) / h;
  dl = (4.0 * dl2 - dl) / 3.0;
  dr = (4.0 * dr2 - dr) / 3.0;
  cplx W = ul(m) * dr - dl * ur(m);
  return ul(lo) * ur(hi) / W;
}

double born_phi_trace(double v0, double a, double nu) {
  double k = std::sqrt(nu);
  double ss = v0 * (a - std::sin(2 * k * a) / (2 * k));
  double cc = v0 * (a + std::sin(2 * k * a) / (2 * k));
  return ss * ss + cc * cc;
}

}  // namespace

TEST_CASE("sign operator and smallness") {
  Potential V = Potential::square_well(-0.5, 1.0);
  Grid g = support_grid(V, pi);
  auto J = sign_operator(V, g);
  for (double s : J.diag) CHECK(s == -1.0);
  auto Jz = sign_operator(Potential::zero(), build_grid(2.0, 16, 1.0, {0.0, 0.0}));
  for (double s : Jz.diag) CHECK(s == 1.0);

  auto r = smallness_report(0.2, pi * pi);
  CHECK(r.q_omega == doctest::Approx(0.8 / pi));
  CHECK(r.q_inf == doctest::Approx(0.3 / pi));
  CHECK(r.q_phi == doctest::Approx(0.1 / pi));
  CHECK(r.c_omega == doctest::Approx(1.0 / (1.0 - 0.8 / pi)));
  CHECK(r.z_cond == doctest::Approx(0.2 / pi / (1.0 - 0.1 / pi)));
  CHECK(r.all_small());
  CHECK(std::isinf(smallness_report(1.0, 1.0).c_omega));
  CHECK_FALSE(smallness_report(1.0, 1.0).all_small());
  CHECK_THROWS_AS(smallness_report(1.0, 0.0), DomainError);
}

TEST_CASE("Krein formula against the exact perturbed Green function") {
  double v0 = -0.5, a = 1.0;
  double L = 5.25;
  Potential V = Potential::square_well(v0, a);
  Grid g = support_grid(V, pi);
  for (cplx q : {cplx(2.2, 0.4), cplx(pi, 1.5), cplx(0.7, 0.1)}) {
    cplx z = q * q;
    auto om = omega_operator(z, V, g, L);
    auto T = t_matrix(om, sign_operator(V, g), V);
    for (double x : {-4.0, -2.5, 1.7, 3.9}) {
      for (double y : {-3.3, 2.0, 4.4}) {
        cplx krein = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          cplx inner = 0.0;
          for (std::size_t j = 0; j < g.size(); ++j) inner += T(i, j) * green_kernel(z, g.nodes()[j], y, L);
          krein += g.weights()[i] * green_kernel(z, x, g.nodes()[i], L) * inner;
        }
        cplx exact = perturbed_green(z, v0, a, L, x, y) - green_kernel(z, x, y, L);
        INFO("q=" << q << " x=" << x << " y=" << y);
        CHECK(std::abs(krein - exact) <= 1e-8 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("T operator quadratic forms") {
  Potential V = Potential::table({-1.0, -0.3, 0.4, 1.0}, {0.0, -1.2, 0.8, 0.0});
  double L = 4.0;
  cplx z(3.0, 0.5);
  Grid g = support_grid(V, 2.0);
  auto T = t_matrix(omega_operator(z, V, g, L), sign_operator(V, g), V);
  // V (1 - R V)^{-1} by a direct solve on the same grid
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd Rw = corrected_weights(g, [&](double x, double y) { return green_kernel(z, x, y, L); });
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = V(g.nodes()[i]);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n) - Rw * v.asDiagonal();
  Eigen::MatrixXcd Td = v.asDiagonal() * A.partialPivLu().inverse();
  Eigen::VectorXcd f(n), h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = g.nodes()[i];
    f(i) = std::cos(2 * x) + cplx(0, 1) * x;
    h(i) = std::exp(-x * x);
  }
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(g.weights().data(), n);
  cplx a1 = f.conjugate().dot(w.asDiagonal() * (T * h));
  cplx a2 = f.conjugate().dot(w.asDiagonal() * (Td * h));
  CHECK(std::abs(a1 - a2) <= 1e-10 * std::abs(a2));
}

TEST_CASE("squared kernel is minus the z-derivative at matrix level") {
  Potential V = Potential::square_well(0.5, 1.0);
  double L = 5.25;
  Grid g = support_grid(V, pi);
  for (cplx q : {cplx(pi, 0.3), cplx(1.1, 2.0)}) {
    cplx z = q * q;
    auto B2 = sandwich(V, g, [&](double x, double y) { return green_kernel_squared(z, x, y, L); });
    double h = 1e-4 * std::abs(z);
    Eigen::MatrixXcd d = (birman_schwinger(z + h, V, g, L).matrix - birman_schwinger(z - h, V, g, L).matrix) / (2 * h);
    CHECK((B2.matrix + d).cwiseAbs().maxCoeff() <= 1e-6 * B2.matrix.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("Omega on the Fermi parabola") {
  Potential V = Potential::square_well(0.1, 1.0);
  int N = 10;
  double L = 5.25;
  Grid g = support_grid(V, pi);
  for (double s : {0.0, 0.3, 2.0}) {
    cplx z = fermi_point(fermi_energy(N, L), s).z;
    auto om = omega_operator(z, V, g, L);
    CHECK(om.smallness.q_omega < 1.0);
    CHECK(std::isfinite(om.norm_bound));
    CHECK(om.bound_ok);
    CHECK(om.norm <= om.norm_bound);
    CHECK(om.rcond > 1e-3);
  }
  // off the parabola the bound is not claimed
  auto off = omega_operator(cplx(5.0, 1.0), V, g, L);
  CHECK(std::isinf(off.norm_bound));
  CHECK_THROWS_AS(omega_operator(cplx(5.0, 1.0), V, build_grid(L, 16, pi, Interval{-0.5, 0.5}), L), ConfigError);
}

TEST_CASE("Phi hat: self-adjoint, bounded, grid converged") {
  double nu = pi * pi;
  for (auto V : {Potential::square_well(-0.5, 1.0), Potential::square_well(0.5, 1.0),
                 Potential::gaussian_truncated(-0.8, 0.4, 1.5)}) {
    GridOptions o;
    auto p = phi_hat(nu, V, support_grid(V, pi, o));
    CHECK(p.self_adjoint_defect <= 1e-8);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(std::abs(p.matrix(a, b)) <= p.entry_bound);
    o.nodes_per_wavelength *= 2;
    auto p2 = phi_hat(nu, V, support_grid(V, pi, o));
    CHECK((p.matrix - p2.matrix).cwiseAbs().maxCoeff() <= 1e-6);
    Eigen::Matrix2cd M = Eigen::Matrix2cd::Identity() + p.matrix * p.matrix / (4 * nu);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (M + M.adjoint()));
    CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-12);
  }
}

TEST_CASE("Nystrom operator norms are grid converged") {
  Potential V = Potential::square_well(-0.5, 1.0);
  double L = 10.25;
  cplx q(pi, 0.5);
  GridOptions o;
  Grid g1 = support_grid(V, pi, o);
  o.nodes_per_wavelength *= 2;
  Grid g2 = support_grid(V, pi, o);
  CHECK(std::abs(operator_norm(birman_schwinger_root(q, V, g1, L)) - operator_norm(birman_schwinger_root(q, V, g2, L))) <=
        1e-6);
  auto c1 = sandwich(V, g1, [&](double x, double y) { return commutator_kernel_root(q, x, y, L); });
  auto c2 = sandwich(V, g2, [&](double x, double y) { return commutator_kernel_root(q, x, y, L); });
  CHECK(std::abs(operator_norm(c1) - operator_norm(c2)) <= 1e-6);
}

TEST_CASE("gamma matrix route") {
  double nu = pi * pi;
  CHECK(gamma_matrix(nu, Potential::zero(), build_grid(2.0, 16, pi, {0.0, 0.0})) == 0.0);
  for (auto V : {Potential::square_well(-0.5, 1.0), Potential::square_well(0.5, 1.0),
                 Potential::gaussian_truncated(1.0, 0.3, 1.2), Potential::table({-1.0, 0.0, 0.5}, {0.0, -1.0, 0.0})}) {
    Grid g = support_grid(V, pi);
    double gm = gamma_matrix(nu, V, g);
    double gs = gamma_scattering(V, nu);
    INFO(V.describe());
    CHECK(std::abs(gm - gs) <= 1e-4);
    CHECK(std::abs(gm - gs) <= 1e-9 * std::max(gs, 1e-3));
  }
}

TEST_CASE("gamma matrix Born limit") {
  double nu = 4.0;
  double v0 = 1.0, a = 1.0;
  Potential V = Potential::square_well(v0, a);
  double born = born_phi_trace(v0, a, nu) / (4 * pi * pi * nu);
  double prev_err = 1.0;
  for (double c : {0.02, 0.01, 0.005}) {
    Potential Vc = V.scaled(c);
    double g = gamma_matrix(nu, Vc, support_grid(Vc, 2.0)) / (c * c);
    double err = std::abs(g - born) / born;
    CHECK(err < prev_err * 0.6);
    prev_err = err;
  }
  CHECK(prev_err < 0.02);
}

TEST_CASE("contour route") {
  SUBCASE("zero potential") {
    Grid g = build_grid(5.25, 16, pi, {0.0, 0.0});
    CHECK(contour_anderson(10, Potential::zero(), 5.25, g, 0.0, 1e-8) == 0.0);
  }
  SUBCASE("agrees with the overlap route") {
    Potential V = Potential::square_well(0.1, 1.0);
    int N = 10;
    double L = 5.25;
    CHECK(count_below(fermi_energy(N, L), V, L) == N);
    Grid g = anderson_grid(N, V, L);
    double direct = anderson_integral(N, V, L, g);
    auto c = contour_anderson_report(N, V, L, g);
    CHECK(std::abs(c.value - direct) <= 1e-3);
    CHECK(std::abs(c.value - direct) <= 1e-4 * direct);
    CHECK(c.tail_estimate <= 1e-8);
  }
  SUBCASE("series route for the squared resolvent") {
    Potential V = Potential::square_well(-0.3, 1.0);
    double L = 5.25;
    Grid g = support_grid(V, pi);
    for (double s : {0.2, 1.5}) {
      double a = contour_integrand(10, V, L, g, s, SquaredResolventRoute::closed_form);
      double b = contour_integrand(10, V, L, g, s, SquaredResolventRoute::spectral_series, 1e-9);
      CHECK(std::abs(a - b) <= 1e-9);
      CHECK(std::abs(a - b) <= 1e-5 * std::abs(a));
    }
  }
  SUBCASE("integrand decays at least like s^-3") {
    Potential V = Potential::square_well(0.1, 1.0);
    double L = 5.25;
    Grid g = support_grid(V, pi);
    double s0 = 10.0;
    double h0 = std::abs(contour_integrand(10, V, L, g, s0));
    for (double s : {20.0, 40.0, 80.0}) CHECK(std::abs(contour_integrand(10, V, L, g, s)) <= h0 * std::pow(s0 / s, 3));
  }
  SUBCASE("explicit cut too small") {
    Potential V = Potential::square_well(0.5, 1.0);
    Grid g = support_grid(V, pi);
    ContourOptions o;
    o.s_cut = 0.5;
    CHECK_THROWS_AS(contour_anderson_report(10, V, 5.25, g, o), SolverError);
  }
}

TEST_CASE("bounds audit") {
  SUBCASE("zero potential") {
    double L = 10.25;
    auto rep = bounds_audit(Potential::zero(), 20, L, build_grid(L, 16, pi, {0.0, 0.0}));
    CHECK(rep.all_pass());
    for (const auto& it : rep.items)
      if (it.name != "inverse_sine_squared" && it.name != "inverse_cosine_squared" && it.name != "harmonic_sum_estimate")
        CHECK(it.lhs == 0.0);
  }
  SUBCASE("square wells") {
    for (double v0 : {-0.5, 0.5}) {
      int N = 20;
      double L = 10.25;
      Potential V = Potential::square_well(v0, 1.0);
      Grid g = anderson_grid(N, V, L);
      auto r = anderson_metrics(N, V, L, g);
      auto rep = bounds_audit(V, N, L, g, {}, AndersonPair{r.anderson_integral, r.ln_transition});
      CHECK(rep.items.size() == 4 * 5 + 3);
      for (const auto& it : rep.items) {
        INFO(it.name << " s=" << it.s << " lhs=" << it.lhs << " rhs=" << it.rhs);
        CHECK(it.pass);
      }
    }
  }
  SUBCASE("harmonic sum item") {
    // independent evaluation of the sum check
    bool ok = true;
    for (int n = 1; n <= 500; ++n) {
      double s = 0.0;
      for (int j = 1; j <= n; ++j) s += 2.0 / (2.0 * n + 1.0 - 2.0 * j);
      ok = ok && s <= 4.0 * std::log(n + 1.0);
    }
    CHECK(ok);
  }
}
