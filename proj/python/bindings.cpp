#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "aoc/anderson_metrics.hpp"
#include "aoc/core_model.hpp"
#include "aoc/errors.hpp"
#include "aoc/free_dirichlet.hpp"
#include "aoc/operator_calculus.hpp"
#include "aoc/perturbed_dirichlet.hpp"
#include "aoc/scattering.hpp"
#include "aoc/sweep.hpp"

namespace py = pybind11;
using namespace aoc;

namespace {

py::dict to_dict(const AndersonResult& r) {
  py::dict d;
  d["N"] = r.N;
  d["L"] = r.L;
  d["anderson_integral"] = r.anderson_integral;
  d["transition_probability"] = r.transition_probability;
  d["ln_transition"] = r.ln_transition;
  d["defect_norm"] = r.defect_norm;
  d["M"] = r.M;
  d["lower_bound"] = r.bounds.lower_defined ? py::object(py::float_(r.bounds.lower)) : py::object(py::none());
  d["upper_bound"] = r.bounds.upper;
  d["theorem_bound"] = r.bounds.theorem_bound;
  d["sandwich_ok"] = r.bounds.sandwich_ok;
  return d;
}

py::dict to_dict(const GammaReport& g) {
  py::dict d;
  d["nu"] = g.nu;
  d["scattering"] = g.scattering;
  d["matrix"] = g.matrix;
  d["gkm"] = g.gkm;
  d["matrix_self_convergence"] = g.matrix_self_convergence;
  d["unitarity_defect"] = g.unitarity_defect;
  d["route_mismatch"] = g.route_mismatch;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dirichlet box spectra, scattering and Slater overlaps for 1D Schrodinger operators";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NearSpectrumError>(m, "NearSpectrumError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<NotInvertibleError>(m, "NotInvertibleError", base.ptr());
  py::register_exception<AmbiguityError>(m, "AmbiguityError", base.ptr());

  py::class_<Potential>(m, "Potential")
      .def_static("zero", &Potential::zero)
      .def_static("square_well", &Potential::square_well, py::arg("v0"), py::arg("a") = 1.0)
      .def_static("gaussian_truncated", &Potential::gaussian_truncated, py::arg("v0"), py::arg("sigma"),
                  py::arg("a"))
      .def_static("table", &Potential::table, py::arg("x"), py::arg("v"))
      .def("__call__", &Potential::operator())
      .def("scaled", &Potential::scaled)
      .def_property_readonly("support_half_width", &Potential::support_half_width)
      .def_property_readonly("is_zero", &Potential::is_zero)
      .def("__repr__", &Potential::describe);

  py::class_<GridOptions>(m, "GridOptions")
      .def(py::init<>())
      .def_readwrite("nodes_per_wavelength", &GridOptions::nodes_per_wavelength)
      .def_readwrite("nodes_per_panel", &GridOptions::nodes_per_panel)
      .def_readwrite("support_refinement", &GridOptions::support_refinement);

  m.def("free_eigenvalue", &free_eigenvalue, py::arg("j"), py::arg("L"));
  m.def("free_eigenfunction", &free_eigenfunction, py::arg("j"), py::arg("L"), py::arg("x"));
  m.def("fermi_energy", &fermi_energy, py::arg("N"), py::arg("L"));
  m.def("green_kernel", &green_kernel, py::arg("z"), py::arg("x"), py::arg("y"), py::arg("L"));
  m.def("kappa_n", &kappa_n, py::arg("N"));
  m.def("kappa_tilde_n", &kappa_tilde_n, py::arg("N"));

  m.def(
      "perturbed_eigenvalue", [](int k, const Potential& V, double L) { return perturbed_eigenvalue(k, V, L); },
      py::arg("k"), py::arg("V"), py::arg("L"));
  m.def(
      "perturbed_spectrum",
      [](int kmax, const Potential& V, double L, int workers) { return perturbed_spectrum(kmax, V, L, {}, workers); },
      py::arg("kmax"), py::arg("V"), py::arg("L"), py::arg("workers") = 1);
  m.def(
      "count_below", [](double E, const Potential& V, double L) { return count_below(E, V, L); }, py::arg("E"),
      py::arg("V"), py::arg("L"));

  m.def(
      "scattering",
      [](const Potential& V, double k) {
        auto s = scattering_coefficients(V, k);
        py::dict d;
        d["t"] = s.t;
        d["r1"] = s.r1;
        d["r2"] = s.r2;
        d["unitarity_defect"] = s.unitarity_defect;
        return d;
      },
      py::arg("V"), py::arg("k"));
  m.def(
      "gamma_scattering", [](const Potential& V, double nu) { return gamma_scattering(V, nu); }, py::arg("V"),
      py::arg("nu"));
  m.def(
      "gamma_gkm", [](const Potential& V, double nu) { return gamma_gkm(V, nu); }, py::arg("V"), py::arg("nu"));
  m.def(
      "gamma_report", [](const Potential& V, double nu, const GridOptions& g) { return to_dict(gamma_report(V, nu, g)); },
      py::arg("V"), py::arg("nu"), py::arg("grid") = GridOptions{});

  m.def(
      "overlap_matrix",
      [](int N, const Potential& V, double L) {
        return overlap_matrix(N, V, L, anderson_grid(N, V, L)).A;
      },
      py::arg("N"), py::arg("V"), py::arg("L"));
  m.def(
      "anderson_metrics",
      [](int N, const Potential& V, double L, int workers) {
        AndersonOptions opt;
        opt.workers = workers;
        py::gil_scoped_release release;
        auto r = anderson_metrics(N, V, L, opt);
        py::gil_scoped_acquire acquire;
        return to_dict(r);
      },
      py::arg("N"), py::arg("V"), py::arg("L"), py::arg("workers") = 1);
  m.def(
      "contour_anderson",
      [](int N, const Potential& V, double L, double tol) {
        ContourOptions opt;
        opt.tol = tol;
        return contour_anderson_report(N, V, L, anderson_grid(N, V, L), opt).value;
      },
      py::arg("N"), py::arg("V"), py::arg("L"), py::arg("tol") = 1e-8);

  m.def(
      "sweep_csv",
      [](const std::string& config_text) {
        std::istringstream in(config_text);
        auto cfg = parse_sweep_config(in);
        cfg.validate();
        std::ostringstream out;
        write_csv(run_sweep(cfg), out);
        return out.str();
      },
      py::arg("config_text"), "Runs a sweep from config text and returns the CSV.");
}
