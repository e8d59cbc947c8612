#include "aoc/nystrom.hpp"

#include <cmath>

#include "aoc/quadrature.hpp"

namespace aoc {

Eigen::MatrixXcd plain_weights(const Grid& grid, const Kernel& kernel) {
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXcd W(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) W(i, j) = kernel(x[i], x[j]) * w[j];
  return W;
}

Eigen::MatrixXcd corrected_weights(const Grid& grid, const Kernel& kernel) {
  Eigen::MatrixXcd W = plain_weights(grid, kernel);
  const auto& x = grid.nodes();
  const int npp = grid.nodes_per_panel();
  const auto& sub = gauss_legendre(2 * npp);
  std::vector<double> basis(npp);
  for (const auto& p : grid.panels()) {
    std::vector<double> local(x.begin() + p.first, x.begin() + p.first + p.count);
    auto bary = barycentric_weights(local);
    for (std::size_t ii = 0; ii < p.count; ++ii) {
      const auto i = static_cast<Eigen::Index>(p.first + ii);
      double xi = x[i];
      std::vector<cplx> row(p.count, 0.0);
      for (auto [lo, hi] : {std::pair{p.lo, xi}, std::pair{xi, p.hi}}) {
        double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (std::size_t q = 0; q < sub.nodes.size(); ++q) {
          double y = c + h * sub.nodes[q];
          cplx kv = kernel(xi, y) * (h * sub.weights[q]);
          lagrange_basis(local, bary, y, basis);
          for (std::size_t j = 0; j < p.count; ++j) row[j] += kv * basis[j];
        }
      }
      for (std::size_t j = 0; j < p.count; ++j) W(i, static_cast<Eigen::Index>(p.first + j)) = row[j];
    }
  }
  return W;
}

NystromOperator sandwich(const Potential& V, const Grid& grid, const Kernel& kernel, bool kinked) {
  NystromOperator op;
  op.nodes = grid.nodes();
  op.weights = grid.weights();
  op.matrix = kinked ? corrected_weights(grid, kernel) : plain_weights(grid, kernel);
  const auto n = static_cast<Eigen::Index>(op.nodes.size());
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = std::sqrt(std::abs(V(op.nodes[i])));
  op.matrix = r.asDiagonal() * op.matrix * r.asDiagonal();
  return op;
}

double operator_norm(const Eigen::MatrixXcd& m, const std::vector<double>& weights) {
  if (m.size() == 0) return 0.0;
  const auto n = static_cast<Eigen::Index>(weights.size());
  Eigen::VectorXd sw(n), isw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sw(i) = std::sqrt(weights[i]);
    isw(i) = 1.0 / sw(i);
  }
  Eigen::MatrixXcd s = sw.asDiagonal() * m * isw.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
  return svd.singularValues()(0);
}

double operator_norm(const NystromOperator& op) { return operator_norm(op.matrix, op.weights); }

}  // namespace aoc
