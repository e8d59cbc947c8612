#include "aoc/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "aoc/errors.hpp"
#include "aoc/quadrature.hpp"

namespace aoc {

std::string to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::square_well: return "square_well";
    case PotentialFamily::gaussian_truncated: return "gaussian_truncated";
    case PotentialFamily::table: return "table";
  }
  return "unknown";
}

PotentialFamily parse_family(const std::string& name) {
  if (name == "square_well") return PotentialFamily::square_well;
  if (name == "gaussian_truncated" || name == "gaussian") return PotentialFamily::gaussian_truncated;
  if (name == "table") return PotentialFamily::table;
  throw ConfigError("unknown potential family '" + name + "'");
}

Potential Potential::zero() {
  Potential p;
  p.finish();
  return p;
}

Potential Potential::square_well(double v0, double a) {
  if (!std::isfinite(v0) || !std::isfinite(a) || a < 0.0 || (a == 0.0 && v0 != 0.0))
    throw ConfigError("square_well: need finite v0 and a > 0");
  Potential p;
  p.family_ = PotentialFamily::square_well;
  p.v0_ = v0;
  p.a_ = a;
  p.finish();
  return p;
}

Potential Potential::gaussian_truncated(double v0, double sigma, double a) {
  if (!std::isfinite(v0) || !(sigma > 0.0) || !(a > 0.0) || !std::isfinite(sigma) ||
      !std::isfinite(a))
    throw ConfigError("gaussian_truncated: need finite v0, sigma > 0, a > 0");
  Potential p;
  p.family_ = PotentialFamily::gaussian_truncated;
  p.v0_ = v0;
  p.sigma_ = sigma;
  p.a_ = a;
  p.finish();
  return p;
}

Potential Potential::table(std::vector<double> abscissae, std::vector<double> values) {
  if (abscissae.size() != values.size() || abscissae.size() < 2)
    throw ConfigError("table: need matching abscissae/values with at least two points");
  for (std::size_t i = 0; i < abscissae.size(); ++i) {
    if (!std::isfinite(abscissae[i]) || !std::isfinite(values[i]))
      throw ConfigError("table: non-finite entry");
    if (i > 0 && !(abscissae[i] > abscissae[i - 1]))
      throw ConfigError("table: abscissae must be strictly increasing");
  }
  Potential p;
  p.family_ = PotentialFamily::table;
  p.a_ = std::max(std::abs(abscissae.front()), std::abs(abscissae.back()));
  p.tx_ = std::move(abscissae);
  p.tv_ = std::move(values);
  p.finish();
  return p;
}

void Potential::finish() {
  switch (family_) {
    case PotentialFamily::square_well:
    case PotentialFamily::gaussian_truncated: zero_ = (v0_ == 0.0); break;
    case PotentialFamily::table:
      zero_ = std::all_of(tv_.begin(), tv_.end(), [](double v) { return v == 0.0; });
      break;
  }
  if (zero_) a_ = (family_ == PotentialFamily::table) ? a_ : 0.0;
  breaks_.clear();
  breaks_.push_back(0.0);
  for (std::size_t i = 0; i < tx_.size(); ++i) {
    if (tx_[i] > -a_ && tx_[i] < a_) breaks_.push_back(tx_[i]);
    if (i + 1 < tx_.size() && tv_[i] * tv_[i + 1] < 0.0)
      breaks_.push_back(tx_[i] + (tx_[i + 1] - tx_[i]) * tv_[i] / (tv_[i] - tv_[i + 1]));
  }
  std::sort(breaks_.begin(), breaks_.end());
  breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
}

double Potential::operator()(double x) const {
  if (zero_ || std::abs(x) > a_) return 0.0;
  switch (family_) {
    case PotentialFamily::square_well: return v0_;
    case PotentialFamily::gaussian_truncated: return v0_ * std::exp(-x * x / (2.0 * sigma_ * sigma_));
    case PotentialFamily::table: {
      if (x < tx_.front() || x > tx_.back()) return 0.0;
      auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
      if (it == tx_.end()) return tv_.back();
      std::size_t i = static_cast<std::size_t>(it - tx_.begin());
      double t = (x - tx_[i - 1]) / (tx_[i] - tx_[i - 1]);
      return tv_[i - 1] + t * (tv_[i] - tv_[i - 1]);
    }
  }
  return 0.0;
}

double Potential::analytic_sup() const {
  if (zero_) return 0.0;
  if (family_ == PotentialFamily::table) {
    double m = 0.0;
    for (double v : tv_) m = std::max(m, std::abs(v));
    return m;
  }
  return std::abs(v0_);
}

double Potential::analytic_sup_negative() const {
  if (zero_) return 0.0;
  if (family_ == PotentialFamily::table) {
    double m = 0.0;
    for (double v : tv_) m = std::max(m, -v);
    return m;
  }
  return std::max(0.0, -v0_);
}

Potential Potential::scaled(double c) const {
  if (!std::isfinite(c)) throw ConfigError("Potential::scaled: non-finite factor");
  Potential p = *this;
  p.v0_ *= c;
  for (double& v : p.tv_) v *= c;
  p.finish();
  return p;
}

std::string Potential::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(family_);
  switch (family_) {
    case PotentialFamily::square_well: os << "{v0=" << v0_ << ",a=" << a_ << "}"; break;
    case PotentialFamily::gaussian_truncated:
      os << "{v0=" << v0_ << ",sigma=" << sigma_ << ",a=" << a_ << "}";
      break;
    case PotentialFamily::table:
      os << "{n=" << tx_.size() << ",x=[";
      for (std::size_t i = 0; i < tx_.size(); ++i) os << (i ? "," : "") << tx_[i];
      os << "],v=[";
      for (std::size_t i = 0; i < tv_.size(); ++i) os << (i ? "," : "") << tv_[i];
      os << "]}";
      break;
  }
  return os.str();
}

Grid::Grid(std::vector<double> boundaries, int nodes_per_panel)
    : bounds_(std::move(boundaries)), npp_(nodes_per_panel) {
  if (npp_ < 1) throw ConfigError("Grid: nodes_per_panel must be positive");
  if (bounds_.size() < 2) return;
  const auto& rule = gauss_legendre(npp_);
  for (std::size_t p = 0; p + 1 < bounds_.size(); ++p) {
    double lo = bounds_[p], hi = bounds_[p + 1];
    if (!(hi > lo)) throw ConfigError("Grid: panel boundaries must increase");
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    panels_.push_back({lo, hi, nodes_.size(), static_cast<std::size_t>(npp_)});
    for (int i = 0; i < npp_; ++i) {
      nodes_.push_back(c + h * rule.nodes[i]);
      weights_.push_back(h * rule.weights[i]);
    }
  }
}

Grid Grid::restricted(double lo, double hi) const {
  std::vector<double> b;
  for (double x : bounds_)
    if (x >= lo && x <= hi) b.push_back(x);
  return Grid(std::move(b), npp_);
}

Grid Grid::refined(int factor) const {
  if (factor < 1) throw ConfigError("Grid::refined: factor must be positive");
  std::vector<double> b;
  for (std::size_t p = 0; p + 1 < bounds_.size(); ++p) {
    double lo = bounds_[p], hi = bounds_[p + 1];
    for (int i = 0; i < factor; ++i) b.push_back(lo + (hi - lo) * i / factor);
  }
  if (!bounds_.empty()) b.push_back(bounds_.back());
  return Grid(std::move(b), npp_);
}

double Grid::integrate(std::span<const double> f) const {
  if (f.size() != nodes_.size()) throw std::invalid_argument("Grid::integrate: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights_[i] * f[i];
  return s;
}

namespace {

std::vector<double> panelize(std::vector<double> breaks, double h_outside, double h_inside,
                             Interval support) {
  std::sort(breaks.begin(), breaks.end());
  double scale = std::max(std::abs(breaks.front()), std::abs(breaks.back()));
  std::vector<double> uniq;
  for (double x : breaks)
    if (uniq.empty() || x - uniq.back() > 1e-13 * scale) uniq.push_back(x);
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
    double lo = uniq[i], hi = uniq[i + 1];
    double mid = 0.5 * (lo + hi);
    bool inside = mid >= support.lo && mid <= support.hi;
    double h = inside ? h_inside : h_outside;
    int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h - 1e-9)));
    for (int k = 0; k < n; ++k) out.push_back(lo + (hi - lo) * k / n);
  }
  out.push_back(uniq.back());
  return out;
}

}  // namespace

Grid build_grid(double L, int nodes_per_wavelength, double wavenumber_hint, Interval support,
                std::span<const double> extra_breaks, int nodes_per_panel, int support_refinement) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("build_grid: L must be positive");
  if (nodes_per_wavelength < 8) throw ConfigError("build_grid: nodes_per_wavelength must be >= 8");
  if (!(wavenumber_hint > 0.0)) throw ConfigError("build_grid: wavenumber hint must be positive");
  if (nodes_per_panel < 2) throw ConfigError("build_grid: nodes_per_panel must be >= 2");
  if (support_refinement < 1) throw ConfigError("build_grid: support_refinement must be >= 1");
  double tol = 1e-12 * L;
  if (support.lo > support.hi || support.lo < -L - tol || support.hi > L + tol)
    throw ConfigError("build_grid: support exceeds [-L, L]");
  std::vector<double> breaks{-L, L, 0.0};
  if (support.hi > support.lo) {
    breaks.push_back(std::max(-L, support.lo));
    breaks.push_back(std::min(L, support.hi));
  }
  for (double x : extra_breaks)
    if (x > -L && x < L) breaks.push_back(x);
  double h = nodes_per_panel * (2.0 * std::numbers::pi / wavenumber_hint) / nodes_per_wavelength;
  return Grid(panelize(std::move(breaks), h, h / support_refinement, support), nodes_per_panel);
}

Grid build_grid(double L, double wavenumber_hint, const Potential& V, const GridOptions& opt) {
  return build_grid(L, opt.nodes_per_wavelength, wavenumber_hint, V.support(), V.breakpoints(),
                    opt.nodes_per_panel, opt.support_refinement);
}

Grid support_grid(const Potential& V, double wavenumber_hint, const GridOptions& opt) {
  double a = V.support_half_width();
  if (V.is_zero() || a == 0.0) return Grid({}, opt.nodes_per_panel);
  if (opt.nodes_per_wavelength < 8) throw ConfigError("support_grid: nodes_per_wavelength must be >= 8");
  if (!(wavenumber_hint > 0.0)) throw ConfigError("support_grid: wavenumber hint must be positive");
  std::vector<double> breaks{-a, a, 0.0};
  for (double x : V.breakpoints()) breaks.push_back(x);
  double h = opt.nodes_per_panel * (2.0 * std::numbers::pi / wavenumber_hint) /
             opt.nodes_per_wavelength / opt.support_refinement;
  return Grid(panelize(std::move(breaks), h, h, V.support()), opt.nodes_per_panel);
}

PotentialNorms potential_norms(const Potential& V, const Grid& grid) {
  PotentialNorms n;
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = V(x[i]);
    double av = std::abs(v);
    n.l1 += w[i] * av;
    n.x1_l1 += w[i] * std::abs(x[i]) * av;
    n.x2_l1 += w[i] * x[i] * x[i] * av;
    n.l1_plus += w[i] * std::max(v, 0.0);
  }
  double sup = 0.0, sup_neg = 0.0;
  double a = V.support_half_width();
  for (const auto& p : grid.panels()) {
    if (p.hi < -a || p.lo > a) continue;
    int m = 4 * static_cast<int>(p.count);
    for (int k = 0; k <= m; ++k) {
      double v = V(p.lo + (p.hi - p.lo) * k / m);
      sup = std::max(sup, std::abs(v));
      sup_neg = std::max(sup_neg, -v);
    }
  }
  n.linf = std::max(sup, V.analytic_sup());
  n.linf_minus = std::max(sup_neg, V.analytic_sup_negative());
  return n;
}

PotentialNorms potential_norms(const Potential& V) {
  return potential_norms(V, support_grid(V, std::numbers::pi));
}

double v_transform(const Potential& V, double L, double s, const Grid& grid) {
  if (s < 0.0) throw DomainError("v_transform: s must be nonnegative");
  double acc = 0.0;
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) <= L) acc += w[i] * std::abs(V(x[i])) * std::exp(s * std::abs(x[i]));
  return acc;
}

cplx inner_product(std::span<const cplx> f, std::span<const cplx> g, const Grid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw std::invalid_argument("inner_product: sample count does not match grid");
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.weights()[i] * std::conj(f[i]) * g[i];
  return s;
}

double inner_product(std::span<const double> f, std::span<const double> g, const Grid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw std::invalid_argument("inner_product: sample count does not match grid");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += grid.weights()[i] * f[i] * g[i];
  return s;
}

SystemConfig SystemConfig::from_density(double rho, int N) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("density must be positive");
  if (N < 1) throw ConfigError("particle number must be >= 1");
  SystemConfig c;
  c.rho = rho;
  c.N = N;
  c.L = (N + 0.5) / (2.0 * rho);
  c.nu = std::numbers::pi * std::numbers::pi * rho * rho;
  return c;
}

SystemConfig SystemConfig::from_box(int N, double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("box half length must be positive");
  if (N < 1) throw ConfigError("particle number must be >= 1");
  SystemConfig c;
  c.N = N;
  c.L = L;
  c.rho = (N + 0.5) / (2.0 * L);
  double k = std::numbers::pi * (N + 0.5) / (2.0 * L);
  c.nu = k * k;
  return c;
}

}  // namespace aoc
