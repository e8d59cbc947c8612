#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "aoc/core_model.hpp"

namespace aoc {

using Kernel = std::function<cplx(double, double)>;

/// Nystrom discretization of an operator sandwiched between sqrt|V| factors.
/// `matrix` acts on nodal values: (Op f)(x_i) ~ sum_j matrix(i, j) f(x_j).
struct NystromOperator {
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXcd matrix;

  std::size_t size() const { return nodes.size(); }
};

/// Quadrature matrix W with sum_j W(i, j) f(x_j) ~ integral K(x_i, y) f(y) dy.
/// On the target's own panel the weights are product-integrated against the Lagrange basis,
/// splitting at y = x_i, so kernels with a derivative jump on the diagonal keep full order.
Eigen::MatrixXcd corrected_weights(const Grid& grid, const Kernel& kernel);

/// Plain weights K(x_i, x_j) w_j, adequate for kernels smooth across the diagonal.
Eigen::MatrixXcd plain_weights(const Grid& grid, const Kernel& kernel);

/// sqrt|V| K sqrt|V| on the grid.
NystromOperator sandwich(const Potential& V, const Grid& grid, const Kernel& kernel, bool kinked = true);

/// Discrete L^2 operator norm: spectral norm of W^{1/2} M W^{-1/2}.
double operator_norm(const NystromOperator& op);
double operator_norm(const Eigen::MatrixXcd& m, const std::vector<double>& weights);

}  // namespace aoc
