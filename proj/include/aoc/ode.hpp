#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>

#include "aoc/errors.hpp"

namespace aoc {

struct OdeTolerance {
  double rel = 1e-10;
  double abs = 1e-12;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double min_step = std::numeric_limits<double>::infinity();

  void merge(const OdeStats& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    rhs_evals += o.rhs_evals;
    min_step = std::min(min_step, o.min_step);
  }
};

template <std::size_t D>
using OdeState = std::array<double, D>;

/// Adaptive Dormand-Prince 5(4) from x0 to x1 (either direction).
/// Steps are clipped to land on every point of `stops` (sorted in the direction of travel),
/// where `observe(x, y)` is called. `h_hint` seeds the first step; 0 picks one.
/// Returns the last accepted step size.
template <std::size_t D, class Rhs, class Observer>
double integrate_dopri5(Rhs&& rhs, OdeState<D>& y, double x0, double x1, const OdeTolerance& tol,
                        std::span<const double> stops, Observer&& observe, OdeStats& stats,
                        double h_hint = 0.0) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double span = x1 - x0;
  if (span == 0.0) return h_hint;
  const double dir = span > 0 ? 1.0 : -1.0;

  OdeState<D> k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
  rhs(x0, y, k1);
  ++stats.rhs_evals;

  double h = std::abs(h_hint);
  if (h == 0.0) {
    double ny = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      double sc = tol.abs + tol.rel * std::abs(y[i]);
      ny = std::max(ny, std::abs(y[i]) / sc);
      nf = std::max(nf, std::abs(k1[i]) / sc);
    }
    h = (ny < 1e-5 || nf < 1e-5) ? 1e-6 : 0.01 * ny / nf;
    h = std::max(h, 1e-12 * std::abs(span));
  }
  h = std::min(h, std::abs(span));

  std::size_t next_stop = 0;
  double x = x0;
  auto remaining = [&](double target) { return (target - x) * dir; };

  while (remaining(x1) > 0.0) {
    double target = x1;
    while (next_stop < stops.size() && remaining(stops[next_stop]) <= 0.0) {
      if (remaining(stops[next_stop]) == 0.0) observe(x, y);
      ++next_stop;
    }
    if (next_stop < stops.size() && remaining(stops[next_stop]) < remaining(x1))
      target = stops[next_stop];
    double hmax = remaining(target);
    bool clipped = false;
    double hs = h;
    if (hs >= hmax * (1.0 - 1e-12)) {
      hs = hmax;
      clipped = true;
    }
    double hh = dir * hs;

    for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + hh * a21 * k1[i];
    rhs(x + c2 * hh, tmp, k2);
    for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + hh * (a31 * k1[i] + a32 * k2[i]);
    rhs(x + c3 * hh, tmp, k3);
    for (std::size_t i = 0; i < D; ++i)
      tmp[i] = y[i] + hh * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(x + c4 * hh, tmp, k4);
    for (std::size_t i = 0; i < D; ++i)
      tmp[i] = y[i] + hh * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(x + c5 * hh, tmp, k5);
    for (std::size_t i = 0; i < D; ++i)
      tmp[i] = y[i] + hh * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    double xn = clipped ? target : x + hh;
    rhs(xn, tmp, k6);
    for (std::size_t i = 0; i < D; ++i)
      ynew[i] = y[i] + hh * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(xn, ynew, k7);
    stats.rhs_evals += 6;

    double err = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      double ei = hh * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(ei) / sc);
    }
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      ++stats.accepted;
      stats.min_step = std::min(stats.min_step, hs);
      x = xn;
      y = ynew;
      k1 = k7;
      double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!clipped || fac < 1.0) h = hs * fac;
      if (clipped && target != x1) {
        observe(x, y);
        ++next_stop;
      }
    } else {
      ++stats.rejected;
      h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
    if (h < 1e-14 * std::max(1.0, std::abs(x))) {
      std::ostringstream os;
      os << "ODE step size underflow at x=" << x << " (h=" << h << ", error ratio " << err << ")";
      throw SolverError(os.str());
    }
    if (stats.accepted + stats.rejected > 50'000'000) throw SolverError("ODE step budget exhausted");
  }
  while (next_stop < stops.size()) {
    if (stops[next_stop] == x1) observe(x, y);
    ++next_stop;
  }
  return h;
}

template <std::size_t D, class Rhs>
double integrate_dopri5(Rhs&& rhs, OdeState<D>& y, double x0, double x1, const OdeTolerance& tol,
                        OdeStats& stats, double h_hint = 0.0) {
  return integrate_dopri5<D>(std::forward<Rhs>(rhs), y, x0, x1, tol, std::span<const double>{},
                             [](double, const OdeState<D>&) {}, stats, h_hint);
}

}  // namespace aoc
