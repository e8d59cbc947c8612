#pragma once

#include <span>
#include <vector>

namespace aoc {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule; the returned reference stays valid for the program lifetime.
const GaussLegendreRule& gauss_legendre(int n);

/// Barycentric weights for Lagrange interpolation on the given nodes.
std::vector<double> barycentric_weights(std::span<const double> nodes);

/// Values of all Lagrange basis polynomials at x.
void lagrange_basis(std::span<const double> nodes, std::span<const double> bary, double x,
                    std::span<double> out);

}  // namespace aoc
