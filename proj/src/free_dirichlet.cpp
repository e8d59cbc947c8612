#include "aoc/free_dirichlet.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "aoc/errors.hpp"
#include "aoc/quadrature.hpp"

namespace aoc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpectrumTol = 1e-14;
const cplx I(0.0, 1.0);

void check_box(double L) {
  if (!(L > 0.0)) throw DomainError("box half length must be positive");
}

cplx normalize_root(cplx q) {
  if (q.imag() < 0.0 || (q.imag() == 0.0 && q.real() < 0.0)) return -q;
  return q;
}

// 1 - exp(2iqd) and 1 + exp(2iqd); bounded for Im q >= 0, d >= 0.
cplx E(cplx q, double d) { return 1.0 - std::exp(2.0 * I * q * d); }
cplx F(cplx q, double d) { return 1.0 + std::exp(2.0 * I * q * d); }

[[noreturn]] void near_spectrum(const char* what, cplx q) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": z=" << q * q << " is too close to the Dirichlet spectrum";
  throw NearSpectrumError(os.str());
}

// |sin(2qL)| = exp(2L Im q)|E(2L)|/2
void check_wronskian(const char* what, cplx q, double L, cplx e0) {
  double mag = 0.5 * std::abs(e0);
  double scale = std::exp(-2.0 * L * q.imag());
  if (mag < kSpectrumTol * scale) near_spectrum(what, q);
}

}  // namespace

double FreeEigenpair::operator()(double x) const { return free_eigenfunction(j, L, x); }

FreeEigenpair free_eigenpair(int j, double L) {
  FreeEigenpair p;
  p.j = j;
  p.L = L;
  p.lambda = free_eigenvalue(j, L);
  p.parity = (j % 2 == 1) ? Parity::even : Parity::odd;
  return p;
}

double free_eigenvalue(int j, double L) {
  if (j < 1) throw DomainError("free_eigenvalue: index must be >= 1");
  check_box(L);
  double k = kPi * j / (2.0 * L);
  return k * k;
}

double free_eigenfunction(int j, double L, double x) {
  if (j < 1) throw DomainError("free_eigenfunction: index must be >= 1");
  check_box(L);
  double arg = kPi * j * x / (2.0 * L);
  double amp = 1.0 / std::sqrt(L);
  return (j % 2 == 1) ? amp * std::cos(arg) : amp * std::sin(arg);
}

double fermi_energy(int N, double L) {
  check_box(L);
  double k = kPi * (N + 0.5) / (2.0 * L);
  return k * k;
}

FermiContourPoint fermi_point(double nu, double s) {
  if (!(nu > 0.0)) throw DomainError("fermi_point: nu must be positive");
  FermiContourPoint p;
  p.s = s;
  p.root = cplx(std::sqrt(nu), s);
  p.z = p.root * p.root;
  p.dz_ds = 2.0 * I * p.root;
  return p;
}

cplx upper_root(cplx z) { return normalize_root(std::sqrt(z)); }

cplx green_kernel(cplx z, double x, double y, double L) {
  return green_kernel_root(upper_root(z), x, y, L);
}

cplx green_kernel_root(cplx q, double x, double y, double L) {
  check_box(L);
  q = normalize_root(q);
  double xl = std::min(x, y), xg = std::max(x, y);
  double d1 = xl + L, d2 = L - xg, r = xg - xl;
  if (std::abs(q) * L < 1e-8) return -d1 * d2 / (2.0 * L);
  cplx e0 = E(q, 2.0 * L);
  check_wronskian("green_kernel", q, L, e0);
  return (-I / (2.0 * q)) * std::exp(I * q * r) * E(q, d1) * E(q, d2) / e0;
}

cplx green_kernel_squared(cplx z, double x, double y, double L) {
  return green_kernel_squared_root(upper_root(z), x, y, L);
}

cplx green_kernel_squared_root(cplx q, double x, double y, double L) {
  check_box(L);
  q = normalize_root(q);
  if (std::abs(q) * L < 1e-6) throw DomainError("green_kernel_squared: z too close to 0");
  double xl = std::min(x, y), xg = std::max(x, y);
  double d1 = xl + L, d2 = L - xg, r = xg - xl;
  cplx e0 = E(q, 2.0 * L);
  check_wronskian("green_kernel_squared", q, L, e0);
  cplx e1 = E(q, d1), e2 = E(q, d2);
  auto dE = [&](double d) { return -2.0 * I * d * std::exp(2.0 * I * q * d); };
  cplx bracket = (-1.0 / q + I * r - dE(2.0 * L) / e0) * e1 * e2 + dE(d1) * e2 + e1 * dE(d2);
  cplx dR_dq = (-I / (2.0 * q)) * std::exp(I * q * r) / e0 * bracket;
  return -dR_dq / (2.0 * q);
}

SeriesValue green_kernel_squared_series(cplx z, double x, double y, double L, double tol) {
  check_box(L);
  if (!(tol > 0.0)) throw DomainError("green_kernel_squared_series: tol must be positive");
  // Beyond lambda_m >= 2|z|: |z - lambda_m| >= lambda_m / 2, so the tail is at most
  // (1/L) * 4 (2L/pi)^4 / (3 J^3).
  double c = 4.0 * std::pow(2.0 * L / kPi, 4) / (3.0 * L);
  int j_min = static_cast<int>(std::ceil(2.0 * L / kPi * std::sqrt(2.0 * std::abs(z))));
  int J = std::max(j_min, static_cast<int>(std::ceil(std::cbrt(c / tol))));
  if (J > 50'000'000) throw SolverError("green_kernel_squared_series: too many terms required");
  SeriesValue out;
  for (int m = 1; m <= J; ++m) {
    cplx d = z - free_eigenvalue(m, L);
    out.value += free_eigenfunction(m, L, x) * free_eigenfunction(m, L, y) / (d * d);
  }
  out.terms = J;
  out.tail_bound = c / std::pow(static_cast<double>(J), 3);
  return out;
}

cplx commutator_kernel(cplx z, double x, double y, double L) {
  return commutator_kernel_root(upper_root(z), x, y, L);
}

cplx commutator_kernel_root(cplx q, double x, double y, double L) {
  check_box(L);
  q = normalize_root(q);
  double xl = std::min(x, y), xg = std::max(x, y);
  double d1 = xl + L, d2 = L - xg, r = xg - xl;
  cplx e0 = E(q, 2.0 * L);
  check_wronskian("commutator_kernel", q, L, e0);
  return 0.25 * std::exp(I * q * r) * (xg * E(q, d1) * F(q, d2) - xl * E(q, d2) * F(q, d1)) / e0;
}

cplx delta_term_kernel(cplx z, double x, double y, double L) {
  return delta_term_kernel_root(upper_root(z), x, y, L);
}

cplx delta_term_kernel_root(cplx q, double x, double y, double L) {
  check_box(L);
  q = normalize_root(q);
  double ax = std::abs(x), ay = std::abs(y);
  cplx eL = E(q, L), fL = F(q, L);
  double scale = std::exp(-L * q.imag());
  if (0.5 * std::abs(eL) < kSpectrumTol * scale || 0.5 * std::abs(fL) < kSpectrumTol * scale)
    near_spectrum("delta_term_kernel", q);
  double sx = x < 0 ? -1.0 : 1.0, sy = y < 0 ? -1.0 : 1.0;
  cplx ph = std::exp(I * q * (2.0 * L - ax - ay));
  cplx ps = sx * sy * ph * E(q, ax) * E(q, ay) / (eL * eL);
  cplx pc = ph * F(q, ax) * F(q, ay) / (fL * fL);
  return 0.25 * L * (ps + pc);
}

cplx truncated_resolvent_direct(int N, cplx z, double x, double y, double L) {
  check_box(L);
  if (N < 0) throw DomainError("truncated_resolvent_direct: N must be >= 0");
  cplx acc = 0.0;
  for (int j = 1; j <= N; ++j) {
    cplx d = z - free_eigenvalue(j, L);
    if (std::abs(d) == 0.0) near_spectrum("truncated_resolvent_direct", std::sqrt(z));
    acc += free_eigenfunction(j, L, x) * free_eigenfunction(j, L, y) / d;
  }
  return acc;
}

namespace {

template <class F>
double integrate_decaying(F f, int N, double rate) {
  using boost::math::quadrature::gauss_kronrod;
  double M = N + 0.5;
  double t_max = (40.0 + std::log(2.0 * M / rate + 1.0)) / rate;
  double pts[] = {0.0, 10.0 / M, 1.0, 10.0, t_max};
  double acc = 0.0;
  double lo = 0.0;
  for (double p : pts) {
    double hi = std::min(p, t_max);
    if (hi <= lo) continue;
    acc += gauss_kronrod<double, 61>::integrate(f, lo, hi, 8, 1e-14);
    lo = hi;
  }
  return acc;
}

double dirichlet_kernel(int N, double u) {
  double sh = std::sin(0.5 * u);
  if (std::abs(sh) > 1e-3) return std::sin((N + 0.5) * u) / sh;
  double s = 1.0;
  for (int j = 1; j <= N; ++j) s += 2.0 * std::cos(j * u);
  return s;
}

double conjugate_kernel(int N, double u) {
  double ch = std::cos(0.5 * u);
  if (std::abs(ch) > 1e-3) return std::cos((N + 0.5) * u) / ch;
  double s = 1.0;
  for (int j = 1; j <= N; ++j) s += 2.0 * ((j % 2) ? -1.0 : 1.0) * std::cos(j * u);
  return (N % 2 ? -1.0 : 1.0) * s;
}

// int_0^a sin(zt (u - a)) K(u) du on panels no wider than pi / (2 (zt + N)).
template <class K>
double oscillatory_integral(double a, double zt, int N, K kernel) {
  if (a == 0.0) return 0.0;
  double hmax = kPi / (2.0 * (zt + N));
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(a) / hmax)));
  const auto& rule = gauss_legendre(12);
  double h = a / n;
  double acc = 0.0;
  for (int p = 0; p < n; ++p) {
    double c = (p + 0.5) * h;
    for (int i = 0; i < 12; ++i) {
      double u = c + 0.5 * h * rule.nodes[i];
      acc += 0.5 * h * rule.weights[i] * std::sin(zt * (u - a)) * kernel(N, u);
    }
  }
  return acc;
}

}  // namespace

double kappa_integral(int N, double z_tilde) {
  if (N < 0) throw DomainError("kappa_integral: N must be >= 0");
  if (!(z_tilde > N)) throw DomainError("kappa_integral: requires z_tilde > N");
  double M = N + 0.5;
  double rate = z_tilde - N;
  auto f = [=](double t) {
    if (t == 0.0) return 2.0 * M;
    return std::exp(-rate * t) * std::expm1(-2.0 * M * t) / std::expm1(-t);
  };
  return integrate_decaying(f, N, rate);
}

double kappa_tilde_integral(int N, double z_tilde) {
  if (N < 0) throw DomainError("kappa_tilde_integral: N must be >= 0");
  if (!(z_tilde > N)) throw DomainError("kappa_tilde_integral: requires z_tilde > N");
  double M = N + 0.5;
  double rate = z_tilde - N;
  auto f = [=](double t) {
    return std::exp(-rate * t) * (1.0 + std::exp(-2.0 * M * t)) / (1.0 + std::exp(-t));
  };
  return integrate_decaying(f, N, rate);
}

double kappa_n(int N) {
  if (N < 1) throw DomainError("kappa_n: N must be >= 1");
  return kappa_integral(N, N + 0.5);
}

double kappa_tilde_n(int N) {
  if (N < 1) throw DomainError("kappa_tilde_n: N must be >= 1");
  return kappa_tilde_integral(N, N + 0.5);
}

TruncatedResolventParts truncated_resolvent_decomposed(int N, double z, double x, double y,
                                                       double L) {
  check_box(L);
  if (N < 0) throw DomainError("truncated_resolvent_decomposed: N must be >= 0");
  if (!(z > 0.0)) throw DomainError("truncated_resolvent_decomposed: z must be positive");
  double k = std::sqrt(z);
  if (!(k > kPi * N / (2.0 * L)))
    throw DomainError("truncated_resolvent_decomposed: requires sqrt(z) > pi N / 2L");
  double zt = 2.0 * L * k / kPi;
  TruncatedResolventParts p;
  p.kappa = kappa_integral(N, zt);
  p.kappa_tilde = kappa_tilde_integral(N, zt);
  double pre = 1.0 / (2.0 * kPi * k);
  p.S0 = pre * std::cos(k * (x - y));
  p.S0_tilde = pre * std::cos(k * (x + y));
  p.S1 = pre * oscillatory_integral(kPi * (x - y) / (2.0 * L), zt, N, dirichlet_kernel);
  p.S1_tilde = pre * oscillatory_integral(kPi * (x + y) / (2.0 * L), zt, N, conjugate_kernel);
  double sgn = (N % 2) ? -1.0 : 1.0;
  p.value = p.kappa * p.S0 - p.S1 - sgn * (p.kappa_tilde * p.S0_tilde - p.S1_tilde);
  return p;
}

cplx tau(double s) {
  double t = std::tanh(s);
  return cplx(1.0, -t) / cplx(1.0, t);
}

}  // namespace aoc
