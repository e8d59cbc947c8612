#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace aoc {

using cplx = std::complex<double>;

enum class PotentialFamily { square_well, gaussian_truncated, table };

std::string to_string(PotentialFamily f);
PotentialFamily parse_family(const std::string& name);

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Real potential with compact support [-a, a].
class Potential {
 public:
  static Potential zero();
  static Potential square_well(double v0, double a);
  static Potential gaussian_truncated(double v0, double sigma, double a);
  /// Linear interpolation through (x_i, v_i); zero outside [x_0, x_n].
  static Potential table(std::vector<double> abscissae, std::vector<double> values);

  double operator()(double x) const;

  PotentialFamily family() const { return family_; }
  double support_half_width() const { return a_; }
  Interval support() const { return {-a_, a_}; }
  /// Points in (-a, a) where V, a derivative, or the sign of V changes; always contains 0.
  const std::vector<double>& breakpoints() const { return breaks_; }
  bool is_zero() const { return zero_; }

  /// Exact sup |V| and sup V_- for the family.
  double analytic_sup() const;
  double analytic_sup_negative() const;

  Potential scaled(double c) const;
  std::string describe() const;

  double v0() const { return v0_; }
  double sigma() const { return sigma_; }
  const std::vector<double>& table_x() const { return tx_; }
  const std::vector<double>& table_v() const { return tv_; }

 private:
  Potential() = default;
  void finish();

  PotentialFamily family_ = PotentialFamily::square_well;
  double v0_ = 0.0;
  double sigma_ = 1.0;
  double a_ = 0.0;
  std::vector<double> tx_, tv_;
  std::vector<double> breaks_;
  bool zero_ = true;
};

struct PotentialNorms {
  double l1 = 0.0;
  double linf = 0.0;
  double x1_l1 = 0.0;
  double x2_l1 = 0.0;
  double l1_plus = 0.0;
  double linf_minus = 0.0;
};

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t first = 0;
  std::size_t count = 0;
};

/// Composite Gauss-Legendre quadrature on an interval.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<double> boundaries, int nodes_per_panel);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& panel_boundaries() const { return bounds_; }
  const std::vector<Panel>& panels() const { return panels_; }
  int nodes_per_panel() const { return npp_; }
  std::size_t size() const { return nodes_.size(); }
  double lo() const { return bounds_.front(); }
  double hi() const { return bounds_.back(); }

  /// Panels lying inside [lo, hi]; lo and hi must be panel boundaries.
  Grid restricted(double lo, double hi) const;
  /// Same panel layout with every panel split into `factor` equal pieces.
  Grid refined(int factor) const;

  double integrate(std::span<const double> f) const;

 private:
  std::vector<double> bounds_;
  std::vector<double> nodes_, weights_;
  std::vector<Panel> panels_;
  int npp_ = 12;
};

struct GridOptions {
  int nodes_per_wavelength = 16;
  int nodes_per_panel = 12;
  /// Extra panel subdivision inside the support of V.
  int support_refinement = 2;
};

/// Panels on [-L, L] with node density >= nodes_per_wavelength per 2*pi/wavenumber_hint.
/// Boundaries always include -L, L, 0, the support endpoints and `extra_breaks`.
Grid build_grid(double L, int nodes_per_wavelength, double wavenumber_hint, Interval support,
                std::span<const double> extra_breaks = {}, int nodes_per_panel = 12,
                int support_refinement = 1);

/// Grid on [-L, L] adapted to V: breakpoints of V included, support refined.
Grid build_grid(double L, double wavenumber_hint, const Potential& V, const GridOptions& opt = {});

/// Grid on the support of V only.
Grid support_grid(const Potential& V, double wavenumber_hint, const GridOptions& opt = {});

PotentialNorms potential_norms(const Potential& V, const Grid& grid);
/// Norms on a support grid built with default options.
PotentialNorms potential_norms(const Potential& V);

/// Integral of |V(x)| e^{s|x|} over [-L, L].
double v_transform(const Potential& V, double L, double s, const Grid& grid);

/// sum_i w_i conj(f_i) g_i
cplx inner_product(std::span<const cplx> f, std::span<const cplx> g, const Grid& grid);
double inner_product(std::span<const double> f, std::span<const double> g, const Grid& grid);

/// N particles at density rho; L and nu follow from the half-integer convention.
struct SystemConfig {
  double rho = 1.0;
  int N = 1;
  double L = 0.75;
  double nu = 0.0;

  static SystemConfig from_density(double rho, int N);
  static SystemConfig from_box(int N, double L);
};

}  // namespace aoc
