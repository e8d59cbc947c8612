#include "aoc/perturbed_dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/parallel.hpp"
#include "segment.hpp"

namespace aoc {
namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

// Breakpoints of V across [-a, a], including both ends.
std::vector<double> interior_breaks(const Potential& V) {
  double a = V.support_half_width();
  std::vector<double> b{-a};
  for (double x : V.breakpoints())
    if (x > -a && x < a) b.push_back(x);
  b.push_back(a);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// theta, Theta for mu > 0: exterior exact, interior integrated as an
// offset from theta(-a) so the tolerance acts on the O(1) interior change only.
PruferTrajectory phase_scaled_root(double mu, const Potential& V, double L, const OdeTolerance& tol) {
  PruferTrajectory out;
  out.mu = mu;
  double k = std::sqrt(mu);
  double a = V.is_zero() ? 0.0 : V.support_half_width();
  double D = L - a;
  double theta_left = k * D;
  double base = std::fmod(theta_left, kPi);
  OdeState<2> y{0.0, D / (2.0 * k)};
  if (a > 0.0) {
    auto breaks = interior_breaks(V);
    double h = 0.0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      double lo = breaks[s], hi = breaks[s + 1];
      auto rhs = [&](double x, const OdeState<2>& u, OdeState<2>& du) {
        double v = detail::segment_value(V, x, lo, hi);
        double th = base + u[0];
        double sn = std::sin(th);
        double s2 = sn * sn;
        du[0] = k - (v / k) * s2;
        du[1] = (1.0 + (v / mu) * s2) / (2.0 * k) - (v / k) * std::sin(2.0 * th) * u[1];
      };
      h = integrate_dopri5<2>(rhs, y, lo, hi, tol, out.stats, h);
    }
  }
  out.theta_final = 2.0 * theta_left + y[0];
  out.dtheta_dmu = y[1] + D / (2.0 * k);
  return out;
}

// General scale c: theta' = c cos^2 + ((mu - V)/c) sin^2 over the whole box.
PruferTrajectory phase_general(double mu, const Potential& V, double L, const OdeTolerance& tol) {
  PruferTrajectory out;
  out.mu = mu;
  double c = kPi / (4.0 * L);
  double a = V.is_zero() ? 0.0 : V.support_half_width();
  std::vector<double> breaks{-L};
  if (a > 0.0)
    for (double b : interior_breaks(V)) breaks.push_back(b);
  breaks.push_back(L);
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  OdeState<2> y{0.0, 0.0};
  double h = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    double lo = breaks[s], hi = breaks[s + 1];
    auto rhs = [&](double x, const OdeState<2>& u, OdeState<2>& du) {
      double v = detail::segment_value(V, x, lo, hi);
      double sn = std::sin(u[0]), cs = std::cos(u[0]);
      double q = (mu - v) / c;
      du[0] = c * cs * cs + q * sn * sn;
      du[1] = sn * sn / c + (q - c) * 2.0 * sn * cs * u[1];
    };
    h = integrate_dopri5<2>(rhs, y, lo, hi, tol, out.stats, h);
  }
  out.theta_final = y[0];
  out.dtheta_dmu = y[1];
  return out;
}

}  // namespace

PruferTrajectory prufer_phase(double mu, const Potential& V, double L, const OdeTolerance& tol) {
  if (!(L > 0.0)) throw DomainError("prufer_phase: L must be positive");
  if (!std::isfinite(mu)) throw DomainError("prufer_phase: non-finite energy");
  if (V.support_half_width() > L) throw ConfigError("prufer_phase: support of V exceeds the box");
  if (mu > 0.0) return phase_scaled_root(mu, V, L, tol);
  return phase_general(mu, V, L, tol);
}

double prufer_phase(double mu, const Potential& V, double L, double tol) {
  if (!(mu > 0.0)) throw DomainError("prufer_phase: mu must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("prufer_phase: tolerance must lie in (0, 1)");
  return prufer_phase(mu, V, L, OdeTolerance{tol, tol * 1e-2}).theta_final;
}

double perturbed_eigenvalue(int k, const Potential& V, double L, const EigenOptions& opt) {
  if (k < 1) throw DomainError("perturbed_eigenvalue: k must be >= 1");
  double lam = free_eigenvalue(k, L);
  double vinf = V.analytic_sup();
  double target = k * kPi;
  double width = std::max(opt.bracket_scale * vinf, 1e-9 * lam);
  double lo = lam - width, hi = lam + width;
  auto f = [&](double mu) {
    auto t = prufer_phase(mu, V, L, opt.ode);
    return std::pair{t.theta_final - target, t.dtheta_dmu};
  };
  // Newton from the free eigenvalue; the bracket is only materialized on demand.
  double mu = lam;
  auto [fm, dm] = f(mu);
  if (fm == 0.0) return mu;
  bool have_lo = false, have_hi = false;
  if (fm < 0.0) lo = mu, have_lo = true;
  else hi = mu, have_hi = true;
  double scale = std::max(std::abs(lam), free_eigenvalue(1, L));
  for (int it = 0; it < opt.max_iterations; ++it) {
    double step = (dm > 0.0) ? -fm / dm : 0.0;
    double cand = mu + step;
    bool ok = dm > 0.0 && std::isfinite(cand);
    if (ok && have_lo && cand <= lo) ok = false;
    if (ok && have_hi && cand >= hi) ok = false;
    if (!ok) {
      int widen = 0;
      while (!have_lo || !have_hi) {
        if (widen++ > opt.max_widenings) {
          std::ostringstream os;
          os << "perturbed_eigenvalue: could not bracket eigenvalue " << k;
          throw SolverError(os.str());
        }
        if (!have_lo) {
          auto [fl, dl] = f(lo);
          if (fl < 0.0) have_lo = true;
          else hi = lo, have_hi = true, lo -= width * std::pow(2.0, widen);
          (void)dl;
        }
        if (!have_hi) {
          auto [fh, dh] = f(hi);
          if (fh > 0.0) have_hi = true;
          else lo = hi, have_lo = true, hi += width * std::pow(2.0, widen);
          (void)dh;
        }
      }
      cand = 0.5 * (lo + hi);
    }
    double prev = mu;
    mu = cand;
    std::tie(fm, dm) = f(mu);
    if (fm == 0.0) return mu;
    if (fm < 0.0) lo = mu, have_lo = true;
    else hi = mu, have_hi = true;
    double tol = opt.root_tol * scale;
    if (std::abs(mu - prev) <= tol || (have_lo && have_hi && hi - lo <= tol)) {
      // one more Newton correction inside the bracket is essentially free accuracy
      double fin = mu - fm / dm;
      if (dm > 0.0 && std::isfinite(fin) && std::abs(fin - mu) <= tol) mu = fin;
      return mu;
    }
  }
  std::ostringstream os;
  os << "perturbed_eigenvalue: no convergence for k=" << k;
  throw SolverError(os.str());
}

double perturbed_eigenvalue(int k, const Potential& V, double L, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("perturbed_eigenvalue: tolerance must lie in (0, 1)");
  EigenOptions opt;
  opt.root_tol = tol;
  return perturbed_eigenvalue(k, V, L, opt);
}

std::vector<double> perturbed_spectrum(int kmax, const Potential& V, double L, const EigenOptions& opt,
                                       int workers) {
  std::vector<double> mu(static_cast<std::size_t>(std::max(kmax, 0)));
  parallel_for(mu.size(), workers, [&](std::size_t i) {
    mu[i] = perturbed_eigenvalue(static_cast<int>(i) + 1, V, L, opt);
  });
  return mu;
}

namespace {

// integral of exp(C u) over [u0, u1]; Re(C u) <= 0 at both ends by construction.
cplx exp_integral(cplx C, double u0, double u1) {
  double h = u1 - u0;
  cplx w = C * h;
  if (std::abs(w) < 0.1) {
    cplx term = 1.0, sum = 1.0;
    for (int n = 1; n < 16; ++n) {
      term *= w / static_cast<double>(n + 1);
      sum += term;
    }
    return std::exp(C * u0) * h * sum;
  }
  return (std::exp(C * u1) - std::exp(C * u0)) / C;
}

}  // namespace

cplx ExpSum::operator()(double d) const {
  cplx s = 0.0;
  for (const auto& t : terms) s += t.alpha * std::exp(t.c * (d - t.d_ref));
  return s;
}

cplx ExpSum::integrate_product(const ExpSum& other) const {
  cplx acc = 0.0;
  for (const auto& t1 : terms) {
    for (const auto& t2 : other.terms) {
      cplx C = t1.c + t2.c;
      double r = C.real() > 0.0 ? D : 0.0;
      cplx pre = t1.alpha * t2.alpha * std::exp(t1.c * (r - t1.d_ref) + t2.c * (r - t2.d_ref));
      acc += pre * exp_integral(C, -r, D - r);
    }
  }
  return acc;
}

ExpSum free_eigenfunction_expsum(int j, double L, int sigma, double D) {
  double kj = kPi * j / (2.0 * L);
  double amp = 1.0 / std::sqrt(L);
  ExpSum s;
  s.D = D;
  for (int eps : {+1, -1}) {
    cplx b = (j % 2 == 1) ? cplx(0.5, 0.0) : cplx(eps, 0.0) / (2.0 * I);
    cplx alpha = b * std::exp(-I * (double)(eps * sigma) * kj * L) * amp;
    s.terms.push_back({alpha, I * (double)(eps * sigma) * kj, 0.0});
  }
  return s;
}

namespace {

// Dirichlet solution on [0, D] in the wall distance d, normalized so that
// value(D) = 1 for mu <= 0, and value = sin(k d)/k for mu > 0.
ExpSum wall_solution(double mu, double D, double amp) {
  ExpSum s;
  s.D = D;
  if (mu > 0.0) {
    double k = std::sqrt(mu);
    s.terms.push_back({amp / (2.0 * I * k), I * k, 0.0});
    s.terms.push_back({-amp / (2.0 * I * k), -I * k, 0.0});
  } else {
    double b = std::max(std::sqrt(-mu), 1e-150);
    double den = -std::expm1(-2.0 * b * D);
    s.terms.push_back({amp / den, b, D});
    s.terms.push_back({-amp * std::exp(-b * D) / den, -b, 0.0});
  }
  return s;
}

}  // namespace

PerturbedEigenpair perturbed_eigenfunction(int k, double mu_k, const Potential& V, const Grid& grid,
                                           const OdeTolerance& tol) {
  if (grid.size() == 0) throw ConfigError("perturbed_eigenfunction: empty grid");
  double L = grid.hi();
  if (std::abs(grid.lo() + L) > 1e-12 * L) throw ConfigError("perturbed_eigenfunction: grid must span [-L, L]");
  double a = V.is_zero() ? 0.0 : V.support_half_width();
  if (a > L) throw ConfigError("perturbed_eigenfunction: support of V exceeds the box");
  double D = L - a;
  auto is_boundary = [&](double x) {
    for (double b : grid.panel_boundaries())
      if (std::abs(b - x) <= 1e-13 * L) return true;
    return false;
  };
  if (a > 0.0 && (!is_boundary(a) || !is_boundary(-a)))
    throw ConfigError("perturbed_eigenfunction: grid lacks panel boundaries at the support endpoints");

  PerturbedEigenpair out;
  out.k = k;
  out.mu = mu_k;
  out.L = L;
  out.a = a;
  out.psi.assign(grid.size(), 0.0);

  // left exterior: psi'(-L) = 1 for mu > 0; psi(-a) = 1 for mu <= 0
  out.left = wall_solution(mu_k, D, 1.0);
  double psi_a, dpsi_a;
  if (mu_k > 0.0) {
    double kk = std::sqrt(mu_k);
    psi_a = std::sin(kk * D) / kk;
    dpsi_a = std::cos(kk * D);
  } else {
    double b = std::max(std::sqrt(-mu_k), 1e-150);
    psi_a = 1.0;
    dpsi_a = b / std::tanh(b * D);
  }

  const auto& nodes = grid.nodes();
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] > -a && nodes[i] < a) interior.push_back(i);

  auto breaks = a > 0.0 ? interior_breaks(V) : std::vector<double>{};
  // integrate segment [breaks[s], breaks[s+1]] from one end, recording psi at interior nodes
  double h = 0.0;
  auto sweep_segment = [&](OdeState<2>& y, std::size_t s, bool forward) {
    double lo = breaks[s], hi = breaks[s + 1];
    std::vector<double> stops;
    std::vector<std::size_t> idx;
    for (std::size_t i : interior)
      if (nodes[i] > lo && nodes[i] < hi) {
        stops.push_back(nodes[i]);
        idx.push_back(i);
      }
    if (!forward) {
      std::reverse(stops.begin(), stops.end());
      std::reverse(idx.begin(), idx.end());
    }
    std::size_t hit = 0;
    auto rhs = [&](double x, const OdeState<2>& u, OdeState<2>& du) {
      double v = detail::segment_value(V, x, lo, hi);
      du[0] = u[1];
      du[1] = (v - mu_k) * u[0];
    };
    auto obs = [&](double, const OdeState<2>& u) {
      if (hit < idx.size()) out.psi[idx[hit++]] = u[0];
    };
    h = integrate_dopri5<2>(rhs, y, forward ? lo : hi, forward ? hi : lo, tol, stops, obs, out.stats, h);
  };

  double A, B;
  if (mu_k > 0.0) {
    OdeState<2> y{psi_a, dpsi_a};
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) sweep_segment(y, s, true);
    psi_a = y[0];
    dpsi_a = y[1];
    // right exterior in d = L - x; keep the Dirichlet branch, report the other one
    double kk = std::sqrt(mu_k);
    double sn = std::sin(kk * D), cs = std::cos(kk * D);
    A = psi_a * sn - dpsi_a / kk * cs;
    B = psi_a * cs + dpsi_a / kk * sn;
    out.right = wall_solution(mu_k, D, A * kk);
  } else {
    // evanescent exteriors: shooting through would amplify the root error by e^{2 b D},
    // so both sides are integrated towards a matching point inside the support
    double b = std::max(std::sqrt(-mu_k), 1e-150);
    std::size_t m = breaks.empty() ? 0 : static_cast<std::size_t>(
        std::min_element(breaks.begin(), breaks.end(), [](double u, double v) { return std::abs(u) < std::abs(v); }) -
        breaks.begin());
    OdeState<2> yl{psi_a, dpsi_a};
    for (std::size_t s = 0; s < m; ++s) sweep_segment(yl, s, true);
    std::vector<double> left_part(out.psi);
    std::fill(out.psi.begin(), out.psi.end(), 0.0);
    OdeState<2> yr{1.0, -b / std::tanh(b * D)};
    h = 0.0;
    for (std::size_t s = breaks.empty() ? 0 : breaks.size() - 1; s > m; --s) sweep_segment(yr, s - 1, false);
    double sc = std::sqrt(std::abs(mu_k) + V.analytic_sup()) + 1.0 / std::max(a, 1e-300);
    double num = yl[0] * yr[0] + yl[1] * yr[1] / (sc * sc);
    double den = yr[0] * yr[0] + yr[1] * yr[1] / (sc * sc);
    double c = num / den;
    for (std::size_t i = 0; i < out.psi.size(); ++i) out.psi[i] = left_part[i] + c * out.psi[i];
    A = c;
    B = std::abs(yl[1] - c * yr[1]) / sc + std::abs(yl[0] - c * yr[0]);
    out.right = wall_solution(mu_k, D, A);
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double x = nodes[i];
    if (x <= -a) out.psi[i] = out.left(x + L).real();
    else if (x >= a) out.psi[i] = out.right(L - x).real();
  }

  double norm2 = out.left.integrate_product(out.left).real() + out.right.integrate_product(out.right).real();
  for (std::size_t i : interior) norm2 += grid.weights()[i] * out.psi[i] * out.psi[i];
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw SolverError("perturbed_eigenfunction: degenerate norm");
  double scale = 1.0 / std::sqrt(norm2);
  double maxabs = 0.0;
  for (double& p : out.psi) {
    p *= scale;
    maxabs = std::max(maxabs, std::abs(p));
  }
  for (auto& t : out.left.terms) t.alpha *= scale;
  for (auto& t : out.right.terms) t.alpha *= scale;
  out.dirichlet_residual = std::abs(B) * scale / std::max(maxabs, 1e-300);
  out.boundary_sign = 1;
  return out;
}

int count_below(double E, const Potential& V, double L, const OdeTolerance& tol) {
  auto t = prufer_phase(E, V, L, tol);
  double m = t.theta_final / kPi;
  double nearest = std::round(m);
  if (std::abs(t.theta_final - nearest * kPi) < 1e-9 * std::max(1.0, t.theta_final)) {
    std::ostringstream os;
    os.precision(17);
    os << "count_below: E=" << E << " is within tolerance of an eigenvalue";
    throw AmbiguityError(os.str());
  }
  return static_cast<int>(std::floor(m));
}

double minimal_c_alpha(const Potential& V, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("minimal_c_alpha: alpha must be positive");
  double a = V.support_half_width();
  if (V.is_zero() || a == 0.0) return 0.0;
  double c = 0.0;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    double x = -a + 2.0 * a * i / n;
    c = std::max(c, std::max(-V(x), 0.0) * std::pow(1.0 + std::abs(x), alpha + 1.0));
  }
  for (double x : V.breakpoints()) c = std::max(c, std::max(-V(x), 0.0) * std::pow(1.0 + std::abs(x), alpha + 1.0));
  return c;
}

double bargmann_upper_bound(double E, const Potential& V, double alpha, double c_alpha, double L) {
  if (!(E > 0.0)) throw DomainError("bargmann_upper_bound: E must be positive");
  if (!(alpha > 0.0)) throw DomainError("bargmann_upper_bound: alpha must be positive");
  if (!(L > 0.0)) throw DomainError("bargmann_upper_bound: L must be positive");
  if (c_alpha < minimal_c_alpha(V, alpha) * (1.0 - 1e-12))
    throw DomainError("bargmann_upper_bound: c_alpha does not majorize V_-");
  double vminus = V.analytic_sup_negative();
  double CE = (2.0 * c_alpha / (alpha * kPi) * std::sqrt(vminus + E) + vminus) / (2.0 * E);
  return 2.0 * L / kPi * std::sqrt(E) + CE;
}

double counting_lower_bound(double E, const Potential& V, double L) {
  if (!(L > 0.0)) throw DomainError("counting_lower_bound: L must be positive");
  double l1p = potential_norms(V).l1_plus;
  if (!(E > 0.0) || E < 2.0 / L * l1p)
    throw DomainError("counting_lower_bound: requires E >= (2/L) ||V_+||_1");
  return 2.0 * L / kPi * std::sqrt(E) - 2.0 * l1p / (kPi * std::sqrt(E)) - 1.0;
}

}  // namespace aoc
