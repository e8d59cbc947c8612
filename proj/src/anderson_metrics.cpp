#include "aoc/anderson_metrics.hpp"

#include <cmath>
#include <sstream>

#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/operator_calculus.hpp"
#include "aoc/parallel.hpp"

namespace aoc {

Grid anderson_grid(int N, const Potential& V, double L, const GridOptions& opt) {
  double k = std::sqrt(fermi_energy(N, L) + V.analytic_sup());
  return build_grid(L, k, V, opt);
}

OverlapMatrix overlap_matrix(int rows, int cols, const Potential& V, const Grid& grid, const AndersonOptions& opt) {
  if (rows < 1 || cols < 1) throw DomainError("overlap_matrix: sizes must be positive");
  if (grid.size() == 0) throw ConfigError("overlap_matrix: empty grid");
  double L = grid.hi();
  double a = V.is_zero() ? 0.0 : V.support_half_width();
  double D = L - a;

  OverlapMatrix out;
  out.mu = perturbed_spectrum(cols, V, L, opt.eigen, opt.workers);
  std::vector<PerturbedEigenpair> psi(cols);
  parallel_for(cols, opt.workers, [&](std::size_t k) {
    psi[k] = perturbed_eigenfunction(static_cast<int>(k) + 1, out.mu[k], V, grid, opt.eigenfunction_tol);
  });

  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.nodes()[i] > -a && grid.nodes()[i] < a) interior.push_back(i);
  const auto n = static_cast<Eigen::Index>(interior.size());
  Eigen::MatrixXd F(n, rows), P(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t g = interior[i];
    double x = grid.nodes()[g], w = grid.weights()[g];
    for (int j = 0; j < rows; ++j) F(i, j) = w * free_eigenfunction(j + 1, L, x);
    for (int k = 0; k < cols; ++k) P(i, k) = psi[k].psi[g];
  }
  out.A = F.transpose() * P;

  parallel_for(rows, opt.workers, [&](std::size_t j) {
    ExpSum fl = free_eigenfunction_expsum(static_cast<int>(j) + 1, L, +1, D);
    ExpSum fr = free_eigenfunction_expsum(static_cast<int>(j) + 1, L, -1, D);
    for (int k = 0; k < cols; ++k)
      out.A(j, k) += (fl.integrate_product(psi[k].left) + fr.integrate_product(psi[k].right)).real();
  });
  out.max_row_norm2 = out.A.rowwise().squaredNorm().maxCoeff();
  return out;
}

OverlapMatrix overlap_matrix(int N, const Potential& V, double L, const Grid& grid, const AndersonOptions& opt) {
  if (std::abs(grid.hi() - L) > 1e-12 * L || std::abs(grid.lo() + L) > 1e-12 * L)
    throw ConfigError("overlap_matrix: grid must span [-L, L]");
  return overlap_matrix(N, N, V, grid, opt);
}

AndersonResult anderson_from_overlap(const OverlapMatrix& ov, const Potential& V, double L) {
  if (ov.rows() != ov.cols()) throw DomainError("anderson_from_overlap: overlap matrix must be square");
  AndersonResult r;
  r.N = ov.rows();
  r.L = L;
  r.max_row_norm2 = ov.max_row_norm2;
  const Eigen::MatrixXd& A = ov.A;
  r.anderson_integral = std::max(0.0, r.N - A.squaredNorm());

  Eigen::MatrixXd defect = Eigen::MatrixXd::Identity(r.N, r.N) - A * A.transpose();
  r.anderson_integral_trace = defect.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(defect, Eigen::EigenvaluesOnly);
  const auto& sig = es.eigenvalues();
  r.defect_norm = sig.cwiseAbs().maxCoeff();
  r.ln_transition_spectral = 0.0;
  for (Eigen::Index i = 0; i < sig.size(); ++i) r.ln_transition_spectral += std::log1p(-sig(i));

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::MatrixXd& U = lu.matrixLU();
  double lnd = 0.0;
  for (int i = 0; i < r.N; ++i) lnd += 2.0 * std::log(std::abs(U(i, i)));
  r.ln_transition = lnd;
  r.transition_probability = std::exp(lnd);

  double nu = fermi_energy(r.N, L);
  try {
    r.M = count_below(nu, V, L);
    r.count_mismatch = std::abs(r.N - r.M);
  } catch (const AmbiguityError&) {
    r.M = -1;
    r.count_mismatch = -1;
  }

  auto& b = r.bounds;
  b.value = r.transition_probability;
  b.upper = std::exp(-r.anderson_integral);
  b.sandwich_ok = r.ln_transition <= -r.anderson_integral;
  if (r.defect_norm < 1.0) {
    b.lower_defined = true;
    b.ln_lower = -r.anderson_integral / (1.0 - r.defect_norm);
    b.lower = std::exp(b.ln_lower);
    b.sandwich_ok = b.sandwich_ok && b.ln_lower <= r.ln_transition;
  }
  auto sm = smallness_report(V, nu);
  double l1 = potential_norms(V).l1;
  b.theorem_vacuous = !(sm.q_omega < 1.0);
  b.theorem_bound = b.theorem_vacuous ? std::numeric_limits<double>::infinity()
                                      : 16.0 * sm.c_omega * l1 / std::sqrt(nu);
  b.theorem_ok = b.theorem_vacuous || r.defect_norm <= b.theorem_bound;
  return r;
}

AndersonResult anderson_metrics(int N, const Potential& V, double L, const Grid& grid, const AndersonOptions& opt) {
  return anderson_from_overlap(overlap_matrix(N, V, L, grid, opt), V, L);
}

AndersonResult anderson_metrics(int N, const Potential& V, double L, const AndersonOptions& opt,
                                const GridOptions& grid_opt) {
  return anderson_metrics(N, V, L, anderson_grid(N, V, L, grid_opt), opt);
}

double anderson_integral(int N, const Potential& V, double L, const Grid& grid) {
  return anderson_metrics(N, V, L, grid).anderson_integral;
}

double transition_probability(int N, const Potential& V, double L, const Grid& grid) {
  return anderson_metrics(N, V, L, grid).transition_probability;
}

DeterminantBounds det_bounds(int N, const Potential& V, double L, const Grid& grid) {
  return anderson_metrics(N, V, L, grid).bounds;
}

}  // namespace aoc
