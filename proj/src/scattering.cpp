#include "aoc/scattering.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "aoc/errors.hpp"
#include "segment.hpp"

namespace aoc {
namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

}  // namespace

ScatteringData scattering_coefficients(const Potential& V, double k, double tol) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("scattering_coefficients: k must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("scattering_coefficients: tolerance must lie in (0, 1)");
  ScatteringData d;
  d.k = k;
  if (V.is_zero()) return d;
  double a = V.support_half_width();

  std::vector<double> breaks{-a};
  for (double x : V.breakpoints())
    if (x > -a && x < a) breaks.push_back(x);
  breaks.push_back(a);

  // two fundamental solutions: (u, u') = (1, 0) and (0, 1) at -a
  OdeState<4> y{1.0, 0.0, 0.0, 1.0};
  OdeTolerance ot{tol, tol * 1e-2};
  double mu = k * k;
  double h = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    double lo = breaks[s], hi = breaks[s + 1];
    auto rhs = [&](double x, const OdeState<4>& u, OdeState<4>& du) {
      double q = detail::segment_value(V, x, lo, hi) - mu;
      du[0] = u[1];
      du[1] = q * u[0];
      du[2] = u[3];
      du[3] = q * u[2];
    };
    h = integrate_dopri5<4>(rhs, y, lo, hi, ot, d.stats, h);
  }
  Eigen::Matrix2d M;
  M << y[0], y[2], y[1], y[3];

  auto wave = [&](double x, double sign) {
    Eigen::Vector2cd w;
    cplx e = std::exp(sign * I * k * x);
    w << e, sign * I * k * e;
    return w;
  };
  // left incidence: M (in + r1 out)(-a) = t in(a)
  {
    Eigen::Matrix2cd A;
    Eigen::Vector2cd rhs = -M.cast<cplx>() * wave(-a, +1.0);
    A.col(0) = M.cast<cplx>() * wave(-a, -1.0);
    A.col(1) = -wave(a, +1.0);
    Eigen::Vector2cd sol = A.partialPivLu().solve(rhs);
    d.r1 = sol(0);
    d.t = sol(1);
  }
  // right incidence: M t' out(-a) = (out + r2 in)(a)
  {
    Eigen::Matrix2cd A;
    Eigen::Vector2cd rhs = wave(a, -1.0);
    A.col(0) = M.cast<cplx>() * wave(-a, -1.0);
    A.col(1) = -wave(a, +1.0);
    Eigen::Vector2cd sol = A.partialPivLu().solve(rhs);
    d.t_right = sol(0);
    d.r2 = sol(1);
  }
  double t2 = std::norm(d.t);
  d.unitarity_defect = std::max(std::abs(t2 + std::norm(d.r1) - 1.0), std::abs(std::norm(d.t_right) + std::norm(d.r2) - 1.0));
  if (!std::isfinite(d.unitarity_defect)) throw SolverError("scattering_coefficients: non-finite transfer matrix");
  return d;
}

double gamma_scattering(const ScatteringData& d) {
  double g = (1.0 - d.t.real()) / (kPi * kPi);
  if (g < -10.0 * std::max(d.unitarity_defect, 1e-15)) {
    std::ostringstream os;
    os << "gamma_scattering: negative value " << g << " exceeds the unitarity defect";
    throw SolverError(os.str());
  }
  return std::max(g, 0.0);
}

double gamma_gkm(const ScatteringData& d) {
  // S = [[t, r2], [r1, t]]
  double f = std::norm(d.t - 1.0) * 2.0 + std::norm(d.r1) + std::norm(d.r2);
  return f / (4.0 * kPi * kPi);
}

double gamma_scattering(const Potential& V, double nu, double tol) {
  if (!(nu > 0.0)) throw DomainError("gamma_scattering: nu must be positive");
  return gamma_scattering(scattering_coefficients(V, std::sqrt(nu), tol));
}

double gamma_gkm(const Potential& V, double nu, double tol) {
  if (!(nu > 0.0)) throw DomainError("gamma_gkm: nu must be positive");
  return gamma_gkm(scattering_coefficients(V, std::sqrt(nu), tol));
}

}  // namespace aoc
