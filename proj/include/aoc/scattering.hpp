#pragma once

#include "aoc/core_model.hpp"
#include "aoc/ode.hpp"

namespace aoc {

/// Plane-wave data at wavenumber k. Left incidence: e^{ikx} + r1 e^{-ikx} -> t e^{ikx};
/// right incidence: e^{-ikx} + r2 e^{ikx} -> t e^{-ikx}.
struct ScatteringData {
  double k = 0.0;
  cplx t{1.0, 0.0};
  cplx r1{0.0, 0.0};
  cplx r2{0.0, 0.0};
  /// transmission amplitude for right incidence (equals t by reciprocity)
  cplx t_right{1.0, 0.0};
  /// max(| |t|^2 + |r1|^2 - 1 |, | |t|^2 + |r2|^2 - 1 |)
  double unitarity_defect = 0.0;
  OdeStats stats;
};

ScatteringData scattering_coefficients(const Potential& V, double k, double tol = 1e-12);

/// (1 - Re t(sqrt nu)) / pi^2
double gamma_scattering(const Potential& V, double nu, double tol = 1e-12);
/// |S - 1|_F^2 / (4 pi^2)
double gamma_gkm(const Potential& V, double nu, double tol = 1e-12);
double gamma_gkm(const ScatteringData& d);
double gamma_scattering(const ScatteringData& d);

}  // namespace aoc
