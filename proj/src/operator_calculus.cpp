#include "aoc/operator_calculus.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/parallel.hpp"
#include "aoc/quadrature.hpp"

namespace aoc {
namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

Eigen::VectorXd sqrt_abs_v(const Potential& V, const Grid& g) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) r(static_cast<Eigen::Index>(i)) = std::sqrt(std::abs(V(g.nodes()[i])));
  return r;
}

Eigen::VectorXd sign_vector(const Potential& V, const Grid& g) {
  auto J = sign_operator(V, g);
  return Eigen::Map<const Eigen::VectorXd>(J.diag.data(), static_cast<Eigen::Index>(J.diag.size()));
}

Eigen::PartialPivLU<Eigen::MatrixXcd> factor_checked(const Eigen::MatrixXcd& A, const char* what, double* rcond_out) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  double rc = A.size() ? lu.rcond() : 1.0;
  if (rcond_out) *rcond_out = rc;
  if (!(rc > 1e-13) || !std::isfinite(rc)) {
    std::ostringstream os;
    os << what << ": system is singular to working precision (rcond=" << rc
       << "); a perturbed eigenvalue may sit at this energy";
    throw NotInvertibleError(os.str());
  }
  return lu;
}

// true if Re q = pi (N + 1/2) / 2L for some integer N >= 0
bool on_fermi_parabola(cplx q, double L) {
  double m = q.real() * 2.0 * L / kPi - 0.5;
  return m > -0.5 && std::abs(m - std::round(m)) < 1e-9 * std::max(1.0, m);
}

}  // namespace

SignOperator sign_operator(const Potential& V, const Grid& grid) {
  SignOperator J;
  J.diag.reserve(grid.size());
  for (double x : grid.nodes()) J.diag.push_back(V(x) < 0.0 ? -1.0 : 1.0);
  return J;
}

SmallnessReport smallness_report(double l1, double nu) {
  if (!(nu > 0.0)) throw DomainError("smallness_report: nu must be positive");
  SmallnessReport r;
  double k = std::sqrt(nu);
  r.q_omega = 4.0 * l1 / k;
  r.q_inf = 1.5 * l1 / k;
  r.q_phi = 0.5 * l1 / k;
  const double inf = std::numeric_limits<double>::infinity();
  r.c_omega = r.q_omega < 1.0 ? 1.0 / (1.0 - r.q_omega) : inf;
  r.c_phi = r.q_phi < 1.0 ? 1.0 / (1.0 - r.q_phi) : inf;
  r.z_cond = l1 * r.c_phi / k;
  return r;
}

SmallnessReport smallness_report(const Potential& V, double nu) {
  return smallness_report(potential_norms(V).l1, nu);
}

Grid restrict_to_support(const Potential& V, const Grid& grid) {
  double a = V.support_half_width();
  if (V.is_zero() || a == 0.0) return Grid({}, grid.nodes_per_panel());
  auto has = [&](double b) {
    for (double x : grid.panel_boundaries())
      if (std::abs(x - b) <= 1e-13 * std::max(1.0, a)) return true;
    return false;
  };
  if (!has(-a) || !has(a)) throw ConfigError("grid lacks panel boundaries at the support endpoints of V");
  return grid.restricted(-a * (1 + 1e-14), a * (1 + 1e-14));
}

NystromOperator birman_schwinger_root(cplx q, const Potential& V, const Grid& grid, double L) {
  Grid S = restrict_to_support(V, grid);
  return sandwich(V, S, [&](double x, double y) { return green_kernel_root(q, x, y, L); });
}

NystromOperator birman_schwinger(cplx z, const Potential& V, const Grid& grid, double L) {
  return birman_schwinger_root(upper_root(z), V, grid, L);
}

OmegaResult omega_operator(cplx z, const Potential& V, const Grid& grid, double L) {
  cplx q = upper_root(z);
  Grid S = restrict_to_support(V, grid);
  auto B = birman_schwinger_root(q, V, S, L);
  Eigen::VectorXd J = sign_vector(V, S);
  const auto n = static_cast<Eigen::Index>(B.size());
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n) - B.matrix * J.asDiagonal();
  OmegaResult out;
  auto lu = factor_checked(A, "omega_operator", &out.rcond);
  out.omega.nodes = B.nodes;
  out.omega.weights = B.weights;
  out.omega.matrix = n ? Eigen::MatrixXcd(lu.inverse()) : Eigen::MatrixXcd(0, 0);
  out.norm = n ? operator_norm(out.omega) : 1.0;
  double l1 = potential_norms(V, S).l1;
  double k = q.real();
  if (k > 0.0) {
    out.smallness = smallness_report(l1, k * k);
    if (out.smallness.q_omega < 1.0 && on_fermi_parabola(q, L)) {
      out.norm_bound = out.smallness.c_omega;
      out.bound_ok = out.norm <= out.norm_bound * (1.0 + 1e-10);
    }
  }
  return out;
}

Eigen::MatrixXcd t_matrix(const OmegaResult& omega, const SignOperator& J, const Potential& V) {
  const auto n = static_cast<Eigen::Index>(omega.omega.size());
  Eigen::VectorXd r(n), j(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i) = std::sqrt(std::abs(V(omega.omega.nodes[i])));
    j(i) = J.diag[i];
  }
  Eigen::VectorXd rj = r.cwiseProduct(j);
  return rj.asDiagonal() * omega.omega.matrix * r.asDiagonal();
}

PhiHat phi_hat(double nu, const Potential& V, const Grid& grid) {
  if (!(nu > 0.0)) throw DomainError("phi_hat: nu must be positive");
  Grid S = restrict_to_support(V, grid);
  PhiHat out;
  out.matrix.setZero();
  double l1 = potential_norms(V, S).l1;
  out.smallness = smallness_report(l1, nu);
  out.entry_bound = l1 * out.smallness.c_phi;
  if (S.size() == 0) return out;
  double k = std::sqrt(nu);
  auto A = sandwich(V, S, [k](double x, double y) { return cplx(std::sin(k * std::abs(x - y)) / (2.0 * k), 0.0); });
  Eigen::VectorXd J = sign_vector(V, S);
  Eigen::VectorXd r = sqrt_abs_v(V, S);
  const auto n = static_cast<Eigen::Index>(S.size());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(n, n) - A.matrix * J.asDiagonal();
  auto lu = factor_checked(M, "phi_hat", nullptr);
  Eigen::MatrixXcd omega(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = S.nodes()[i];
    omega(i, 0) = r(i) * std::sin(k * x);
    omega(i, 1) = r(i) * std::cos(k * x);
  }
  Eigen::MatrixXcd u = lu.solve(omega);
  Eigen::VectorXd wj(n);
  for (Eigen::Index i = 0; i < n; ++i) wj(i) = S.weights()[i] * J(i);
  out.matrix = omega.transpose() * wj.asDiagonal() * u;
  out.self_adjoint_defect = (out.matrix - out.matrix.adjoint()).cwiseAbs().maxCoeff();
  return out;
}

GammaMatrixResult gamma_matrix_report(double nu, const Potential& V, const Grid& grid) {
  GammaMatrixResult out;
  out.phi = phi_hat(nu, V, grid);
  Eigen::Matrix2cd P = 0.5 * (out.phi.matrix + out.phi.matrix.adjoint());
  Eigen::Matrix2cd P2 = P * P;
  Eigen::Matrix2cd A = Eigen::Matrix2cd::Identity() + P2 / (4.0 * nu);
  Eigen::FullPivLU<Eigen::Matrix2cd> lu(A);
  if (!lu.isInvertible()) throw SolverError("gamma_matrix: 1 + PhiHat^2/4nu is singular (corrupted discretization)");
  cplx tr = (lu.solve(P2)).trace();
  double g = tr.real() / (4.0 * kPi * kPi * nu);
  if (g < -1e-14) throw SolverError("gamma_matrix: negative value indicates a corrupted discretization");
  out.gamma = std::max(g, 0.0);
  return out;
}

double gamma_matrix(double nu, const Potential& V, const Grid& grid) {
  return gamma_matrix_report(nu, V, grid).gamma;
}

double contour_integrand(int N, const Potential& V, double L, const Grid& support, double s,
                         SquaredResolventRoute route, double series_tol) {
  Grid S = restrict_to_support(V, support);
  const auto n = static_cast<Eigen::Index>(S.size());
  if (n == 0 || N < 1) return 0.0;
  double k = kPi * (N + 0.5) / (2.0 * L);
  cplx q(k, s);
  cplx z = q * q;
  auto B = birman_schwinger_root(q, V, S, L);
  Eigen::VectorXd J = sign_vector(V, S);
  Eigen::VectorXd r = sqrt_abs_v(V, S);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n) - B.matrix * J.asDiagonal();
  auto lu = factor_checked(A, "contour_integrand", nullptr);

  Eigen::MatrixXcd B2;
  if (route == SquaredResolventRoute::closed_form) {
    B2 = sandwich(V, S, [&](double x, double y) { return green_kernel_squared_root(q, x, y, L); }).matrix;
  } else {
    double c = 4.0 * std::pow(2.0 * L / kPi, 4) / (3.0 * L);
    int j_min = static_cast<int>(std::ceil(2.0 * L / kPi * std::sqrt(2.0 * std::abs(z))));
    int Jmax = std::max(j_min, static_cast<int>(std::ceil(std::cbrt(c / series_tol))));
    Eigen::MatrixXcd Phi(n, Jmax);
    Eigen::VectorXcd d(Jmax);
    for (int m = 1; m <= Jmax; ++m) {
      cplx den = z - free_eigenvalue(m, L);
      d(m - 1) = 1.0 / (den * den);
      for (Eigen::Index i = 0; i < n; ++i) Phi(i, m - 1) = r(i) * free_eigenfunction(m, L, S.nodes()[i]);
    }
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(S.weights().data(), n);
    B2 = Phi * d.asDiagonal() * Phi.transpose() * w.asDiagonal();
  }

  Eigen::MatrixXcd Vphi(n, N);
  for (int j = 1; j <= N; ++j)
    for (Eigen::Index i = 0; i < n; ++i) Vphi(i, j - 1) = r(i) * free_eigenfunction(j, L, S.nodes()[i]);
  Eigen::MatrixXcd Y = J.asDiagonal() * lu.solve(Vphi);
  Y = J.asDiagonal() * lu.solve(B2 * Y);
  cplx g = 0.0;
  for (int j = 0; j < N; ++j) {
    cplx dot = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) dot += S.weights()[i] * Vphi(i, j) * Y(i, j);
    g += dot / (z - free_eigenvalue(j + 1, L));
  }
  return 2.0 / kPi * (g * q).real();
}

ContourResult contour_anderson_report(int N, const Potential& V, double L, const Grid& grid, const ContourOptions& opt) {
  if (N < 1) throw DomainError("contour_anderson: N must be >= 1");
  if (!(opt.tol > 0.0 && opt.tol < 1.0)) throw DomainError("contour_anderson: tolerance must lie in (0, 1)");
  ContourResult out;
  Grid S = restrict_to_support(V, grid);
  if (S.size() == 0) {
    out.s_cut = opt.s_cut > 0.0 ? opt.s_cut : std::max(10.0 / L, 5.0);
    return out;
  }
  auto h = [&](double s) { return contour_integrand(N, V, L, S, s, opt.route); };

  // |h| falls off at least like s^-4; the tail beyond s_cut is bounded by s_cut |h| / 3,
  // with the value at 2 s_cut guarding against a sign change near s_cut
  auto tail = [&](double sc) {
    double t = sc / 3.0 * std::max(std::abs(h(sc)), 16.0 * std::abs(h(2.0 * sc)));
    out.evaluations += 2;
    return t;
  };
  out.s_cut = opt.s_cut > 0.0 ? opt.s_cut : std::max(10.0 / L, 5.0);
  out.tail_estimate = tail(out.s_cut);
  if (opt.s_cut <= 0.0) {
    for (int i = 0; i < 12 && out.tail_estimate > opt.tol; ++i) {
      out.s_cut *= 2.0;
      out.tail_estimate = tail(out.s_cut);
    }
  }
  if (out.tail_estimate > opt.tol) {
    std::ostringstream os;
    os << "contour_anderson: tail estimate " << out.tail_estimate << " beyond s_cut=" << out.s_cut
       << " exceeds tolerance " << opt.tol;
    throw SolverError(os.str());
  }

  std::vector<double> bounds{0.0};
  double h0 = std::min(0.5 / L, out.s_cut);
  while (bounds.back() < out.s_cut) {
    double b = bounds.back();
    double w = std::min(h0 * std::pow(1.25, static_cast<double>(bounds.size() - 1)), std::max(0.5, 0.2 * b));
    bounds.push_back(std::min(b + w, out.s_cut));
  }

  auto integrate = [&](const std::vector<double>& b) {
    const auto& rule = gauss_legendre(opt.nodes_per_panel);
    std::vector<double> s_nodes, s_weights;
    for (std::size_t p = 0; p + 1 < b.size(); ++p) {
      double c = 0.5 * (b[p] + b[p + 1]), hw = 0.5 * (b[p + 1] - b[p]);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        s_nodes.push_back(c + hw * rule.nodes[i]);
        s_weights.push_back(hw * rule.weights[i]);
      }
    }
    std::vector<double> vals(s_nodes.size());
    parallel_for(s_nodes.size(), opt.workers, [&](std::size_t i) { vals[i] = h(s_nodes[i]); });
    out.evaluations += s_nodes.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) acc += s_weights[i] * vals[i];
    return acc;
  };

  double prev = integrate(bounds);
  double cur = prev;
  out.quadrature_error = std::numeric_limits<double>::infinity();
  for (int level = 0; level < opt.max_refinements; ++level) {
    std::vector<double> fine;
    for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
      fine.push_back(bounds[p]);
      fine.push_back(0.5 * (bounds[p] + bounds[p + 1]));
    }
    fine.push_back(bounds.back());
    bounds = std::move(fine);
    cur = integrate(bounds);
    out.quadrature_error = std::abs(cur - prev);
    if (out.quadrature_error <= opt.tol) break;
    prev = cur;
  }
  if (out.quadrature_error > opt.tol) {
    std::ostringstream os;
    os << "contour_anderson: quadrature error " << out.quadrature_error << " exceeds tolerance " << opt.tol
       << " after " << opt.max_refinements << " refinements";
    throw SolverError(os.str());
  }
  out.value = cur;
  return out;
}

double contour_anderson(int N, const Potential& V, double L, const Grid& grid, double s_cut, double tol) {
  ContourOptions opt;
  opt.s_cut = s_cut;
  opt.tol = tol;
  return contour_anderson_report(N, V, L, grid, opt).value;
}

bool AuditReport::all_pass() const {
  for (const auto& it : items)
    if (!it.pass) return false;
  return true;
}

namespace {

AuditItem make_item(std::string name, double s, double lhs, double rhs) {
  AuditItem it;
  it.name = std::move(name);
  it.s = s;
  it.lhs = lhs;
  it.rhs = rhs;
  it.pass = lhs <= rhs;
  it.margin = rhs > 0.0 ? 1.0 - lhs / rhs : (lhs <= 0.0 ? 0.0 : -lhs);
  return it;
}

// log |sin(a + ib)|^2 and log |cos(a + ib)|^2 without overflow
double log_abs2_sin(double a, double b) {
  double e = std::exp(-2.0 * std::abs(b));
  double sa = std::sin(a);
  double sh = 0.5 * (1.0 - e);
  return 2.0 * std::abs(b) + std::log(sa * sa * e + sh * sh);
}
double log_abs2_cos(double a, double b) {
  double e = std::exp(-2.0 * std::abs(b));
  double ca = std::cos(a);
  double sh = 0.5 * (1.0 - e);
  return 2.0 * std::abs(b) + std::log(ca * ca * e + sh * sh);
}

}  // namespace

AuditReport bounds_audit(const Potential& V, int N, double L, const Grid& grid, const AuditSamples& samples,
                         std::optional<AndersonPair> anderson) {
  if (N < 1) throw DomainError("bounds_audit: N must be >= 1");
  AuditReport rep;
  Grid S = restrict_to_support(V, grid);
  auto norms = potential_norms(V, S);
  double nu = fermi_energy(N, L);
  double k = std::sqrt(nu);

  for (double s : samples.s) {
    double a = L * k, b = L * s;
    for (int which = 0; which < 2; ++which) {
      double log_lhs = -(which == 0 ? log_abs2_sin(a, b) : log_abs2_cos(a, b));
      double log_rhs = std::log(4.0) - 2.0 * L * std::abs(s);
      AuditItem it;
      it.name = which == 0 ? "inverse_sine_squared" : "inverse_cosine_squared";
      it.s = s;
      it.lhs = std::exp(log_lhs);
      it.rhs = std::exp(log_rhs);
      it.pass = log_lhs <= log_rhs + 1e-13;
      it.margin = 1.0 - std::exp(log_lhs - log_rhs);
      rep.items.push_back(it);
    }
    cplx q(k, s);
    double den = std::sqrt(nu + s * s);
    double bs = S.size() ? operator_norm(birman_schwinger_root(q, V, S, L)) : 0.0;
    rep.items.push_back(make_item("birman_schwinger_norm", s, bs, 4.0 * norms.l1 / den));
    double sn = 0.0;
    if (S.size()) {
      cplx z = q * q;
      sn = operator_norm(sandwich(V, S, [&](double x, double y) { return truncated_resolvent_direct(N, z, x, y, L); }, false));
    }
    rep.items.push_back(make_item("truncated_resolvent_norm", s, sn, 8.0 / kPi * norms.l1 * std::log(N + 1.0) / den));
    double cn = S.size() ? operator_norm(sandwich(V, S, [&](double x, double y) { return commutator_kernel_root(q, x, y, L); })) : 0.0;
    rep.items.push_back(make_item("commutator_norm", s, cn, 8.0 * std::sqrt(norms.x2_l1 * norms.l1)));
  }
  double gn = S.size() ? operator_norm(sandwich(V, S, [k](double x, double y) { return cplx(std::sin(k * std::abs(x - y)), 0.0); })) : 0.0;
  rep.items.push_back(make_item("sine_kernel_norm", 0.0, gn, norms.l1));

  double worst_margin = 1.0;
  double worst_lhs = 0.0, worst_rhs = 1.0;
  bool ok = true;
  for (int n = 1; n <= samples.sum_check_max; ++n) {
    double sum = 0.0;
    for (int j = 1; j <= n; ++j) sum += 1.0 / (n + 0.5 - j);
    double rhs = 4.0 * std::log(n + 1.0);
    double m = 1.0 - sum / rhs;
    if (m < worst_margin) worst_margin = m, worst_lhs = sum, worst_rhs = rhs;
    ok = ok && sum <= rhs;
  }
  AuditItem sum_item = make_item("harmonic_sum_estimate", 0.0, worst_lhs, worst_rhs);
  sum_item.pass = ok;
  rep.items.push_back(sum_item);

  if (anderson) {
    AuditItem it;
    it.name = "anderson_inequality";
    it.lhs = anderson->ln_transition;
    it.rhs = -anderson->anderson_integral;
    it.pass = it.lhs <= it.rhs + 1e-10;
    it.margin = it.rhs - it.lhs;
    rep.items.push_back(it);
  }
  return rep;
}

}  // namespace aoc
