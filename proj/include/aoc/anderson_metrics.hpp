#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aoc/core_model.hpp"
#include "aoc/perturbed_dirichlet.hpp"

namespace aoc {

/// A(j, k) = (phi_j, psi_k), free states in rows and perturbed states in columns.
struct OverlapMatrix {
  Eigen::MatrixXd A;
  /// max_j sum_k A(j, k)^2
  double max_row_norm2 = 0.0;
  /// perturbed eigenvalues of the columns
  std::vector<double> mu;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
};

struct AndersonOptions {
  EigenOptions eigen{};
  OdeTolerance eigenfunction_tol{1e-11, 1e-13};
  int workers = 1;
};

/// Overlaps of phi_1..phi_rows with psi_1..psi_cols. The grid must span [-L, L] with
/// panel boundaries at the support endpoints of V.
OverlapMatrix overlap_matrix(int rows, int cols, const Potential& V, const Grid& grid,
                             const AndersonOptions& opt = {});
OverlapMatrix overlap_matrix(int N, const Potential& V, double L, const Grid& grid,
                             const AndersonOptions& opt = {});

/// Default grid for overlaps at particle number N.
Grid anderson_grid(int N, const Potential& V, double L, const GridOptions& opt = {});

struct DeterminantBounds {
  /// exp(-I / (1 - defect)); only meaningful when lower_defined
  double lower = 0.0;
  double ln_lower = 0.0;
  bool lower_defined = false;
  double upper = 1.0;
  double value = 1.0;
  double theorem_bound = 0.0;
  bool sandwich_ok = true;
  /// true when q_omega >= 1 so the theorem bound does not apply
  bool theorem_vacuous = false;
  bool theorem_ok = true;
};

struct AndersonResult {
  int N = 0;
  double L = 0.0;
  double anderson_integral = 0.0;
  /// tr(1 - A A^T)
  double anderson_integral_trace = 0.0;
  double transition_probability = 1.0;
  double ln_transition = 0.0;
  /// ln det(A A^T) from the eigenvalues of 1 - A A^T
  double ln_transition_spectral = 0.0;
  double defect_norm = 0.0;
  /// count_below(nu_N); -1 when nu_N is too close to an eigenvalue to decide
  int M = -1;
  int count_mismatch = 0;
  double max_row_norm2 = 0.0;
  DeterminantBounds bounds;
};

AndersonResult anderson_from_overlap(const OverlapMatrix& ov, const Potential& V, double L);
AndersonResult anderson_metrics(int N, const Potential& V, double L, const Grid& grid,
                                const AndersonOptions& opt = {});
AndersonResult anderson_metrics(int N, const Potential& V, double L, const AndersonOptions& opt = {},
                                const GridOptions& grid_opt = {});

double anderson_integral(int N, const Potential& V, double L, const Grid& grid);
double transition_probability(int N, const Potential& V, double L, const Grid& grid);
DeterminantBounds det_bounds(int N, const Potential& V, double L, const Grid& grid);

}  // namespace aoc
