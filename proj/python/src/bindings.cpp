#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shellmem/harness.hpp"

namespace py = pybind11;
using namespace shellmem;

PYBIND11_MODULE(_shellmem, m) {
  m.doc() = "Viscoelastic shell membrane solvers and checks";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ClassificationMismatchError>(m, "ClassificationMismatchError", PyExc_RuntimeError);
  py::register_exception<UnknownSuiteError>(m, "UnknownSuiteError", PyExc_ValueError);

  py::class_<MaterialParams>(m, "MaterialParams")
      .def(py::init<double, double, double, double>(), py::arg("lam"), py::arg("mu"), py::arg("theta"), py::arg("rho"))
      .def_property_readonly("lam", &MaterialParams::lambda)
      .def_property_readonly("mu", &MaterialParams::mu)
      .def_property_readonly("theta", &MaterialParams::theta)
      .def_property_readonly("rho", &MaterialParams::rho)
      .def_property_readonly("k", &MaterialParams::k)
      .def_property_readonly("Lambda", &MaterialParams::Lambda);

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("chart", &Scenario::chart)
      .def_readwrite("T", &Scenario::T)
      .def_readwrite("N", &Scenario::N)
      .def_readwrite("nx", &Scenario::nx)
      .def_readwrite("ny", &Scenario::ny)
      .def_readwrite("layers", &Scenario::layers)
      .def_readwrite("eps", &Scenario::eps)
      .def_readwrite("memory", &Scenario::memory)
      .def_readwrite("expect_first_kind", &Scenario::expect_first_kind)
      .def_readwrite("min_ratio", &Scenario::min_ratio)
      .def_readwrite("params", &Scenario::params)
      .def("validate", &Scenario::validate);

  m.def("builtin_scenario_names", &builtin_scenario_names);
  m.def("builtin_scenario", &builtin_scenario, py::arg("name"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", [](const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in, "<string>");
  }, py::arg("text"));

  py::class_<KernelReport>(m, "KernelReport")
      .def_readonly("sigma_min", &KernelReport::sigma_min)
      .def_readonly("tol", &KernelReport::tol)
      .def_property_readonly("kind", [](const KernelReport& k) { return kind_name(k.kind); });

  py::class_<ConvergenceRow>(m, "ConvergenceRow")
      .def_readonly("eps", &ConvergenceRow::eps)
      .def_readonly("distance", &ConvergenceRow::distance)
      .def_readonly("d3", &ConvergenceRow::d3)
      .def_readonly("k0", &ConvergenceRow::k0);

  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("scenario", &ConvergenceReport::scenario)
      .def_readonly("kernel", &ConvergenceReport::kernel)
      .def_readonly("xi_norm", &ConvergenceReport::xi_norm)
      .def_readonly("rows", &ConvergenceReport::rows)
      .def("distance_ratios", &ConvergenceReport::distance_ratios)
      .def("passed", &ConvergenceReport::passed)
      .def("csv", [](const ConvergenceReport& r) { return report_csv(r); })
      .def("table", [](const ConvergenceReport& r) { return report_table(r); });

  m.def("run_convergence", [](const Scenario& s) {
    py::gil_scoped_release release;
    return run_convergence(s);
  }, py::arg("scenario"));

  m.def("solve2d", [](const Scenario& s) {
    Solve2DResult r;
    {
      py::gil_scoped_release release;
      r = run_solve2d(s);
    }
    py::dict d;
    d["kernel"] = r.kernel;
    d["t"] = r.history.t;
    d["seminorm"] = r.history.seminorm;
    d["final"] = r.history.u.back();
    return d;
  }, py::arg("scenario"), "Solve the limit membrane problem; returns times, seminorms and the final nodal field.");

  m.def("solve3d", [](const Scenario& s, double eps) {
    Solve3DResult r;
    {
      py::gil_scoped_release release;
      r = run_solve3d(s, eps);
    }
    py::dict d;
    d["eps"] = r.eps;
    d["t"] = r.history.t;
    d["d3"] = r.d3;
    d["average_seminorm"] = r.average_seminorm;
    d["final_average"] = r.average.back();
    return d;
  }, py::arg("scenario"), py::arg("eps"));

  py::class_<PropertyCheck>(m, "PropertyCheck")
      .def_readonly("name", &PropertyCheck::name)
      .def_readonly("passed", &PropertyCheck::passed)
      .def_readonly("value", &PropertyCheck::value)
      .def_readonly("threshold", &PropertyCheck::threshold)
      .def_readonly("detail", &PropertyCheck::detail);

  py::class_<PropertyReport>(m, "PropertyReport")
      .def_readonly("suite", &PropertyReport::suite)
      .def_readonly("checks", &PropertyReport::checks)
      .def("passed", &PropertyReport::passed);

  m.def("property_suites", &property_suites);
  m.def("run_properties", &run_properties, py::arg("suite"), py::arg("seed") = 1);
  m.def("geometry_check", [](const Scenario& s, std::uint64_t seed) { return run_geometry_check(s, seed).checks; },
        py::arg("scenario"), py::arg("seed") = 1);

  m.def("convolve", [](const std::vector<double>& f, double k, double T) {
    return convolve(f, k, TimeGrid(T, static_cast<int>(f.size()) - 1));
  }, py::arg("f"), py::arg("k"), py::arg("T"), "H(t_n) = int_0^t_n e^{-k(t_n-s)} f(s) ds on a uniform grid over [0, T].");
  m.def("fit_loglog_slope", &fit_loglog_slope, py::arg("h"), py::arg("err"));
}
