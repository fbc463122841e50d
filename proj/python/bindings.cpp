#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <string>

#include "snls/harness.hpp"

namespace py = pybind11;
using namespace snls;

namespace {

py::dict moment(const MomentEstimate& m) {
  py::dict d;
  d["mean"] = m.mean;
  d["std_error"] = m.std_error;
  d["samples"] = m.samples;
  return d;
}

// Snapshots as one array of shape (snapshots, n, ..., n).
py::array_t<Complex> stack(const std::vector<ComplexField>& fields, const GridSpec& grid) {
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(fields.size())};
  for (int a = 0; a < grid.dim(); ++a) shape.push_back(static_cast<py::ssize_t>(grid.points_per_axis()));
  py::array_t<Complex> out(shape);
  Complex* dst = out.mutable_data();
  for (const auto& f : fields) dst = std::copy(f.values().begin(), f.values().end(), dst);
  return out;
}

py::dict simulate(const RunConfig& config) {
  Trajectory traj;
  {
    py::gil_scoped_release release;
    traj = solve(config.solver_config(), {config.master_seed, 0, nullptr});
  }
  std::vector<double> energies;
  for (std::size_t j = 0; j < traj.size(); ++j) energies.push_back(energy(traj.v_star(j)));
  py::dict d;
  d["times"] = traj.times;
  d["v"] = stack(traj.v, traj.v.front().grid());
  d["psi"] = stack(traj.psi, traj.v.front().grid());
  d["energy"] = energies;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral simulator for the energy-critical stochastic Gross-Pitaevskii equation";
  m.attr("version") = std::string(kVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_RuntimeError);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("dim", &RunConfig::dim)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("box_length", &RunConfig::box_length)
      .def_readwrite("t_final", &RunConfig::t_final)
      .def_readwrite("dt", &RunConfig::dt)
      .def_readwrite("snapshot_stride", &RunConfig::snapshot_stride)
      .def_readwrite("ensemble_size", &RunConfig::ensemble_size)
      .def_readwrite("master_seed", &RunConfig::master_seed)
      .def_readwrite("workers", &RunConfig::workers)
      .def_property(
          "scheme", [](const RunConfig& c) { return std::string(to_string(c.scheme)); },
          [](RunConfig& c, const std::string& s) { c.scheme = parse_scheme(s); })
      .def_property(
          "noise_amplitude", [](const RunConfig& c) { return c.noise.amplitude; },
          [](RunConfig& c, double a) { c.noise.amplitude = a; })
      .def_property(
          "noise_sigma", [](const RunConfig& c) { return c.noise.sigma; },
          [](RunConfig& c, double s) { c.noise.sigma = s; })
      .def_property_readonly("hash", &RunConfig::hash)
      .def("canonical_text", &RunConfig::canonical_text);

  m.def("parse_config", &parse_config, py::arg("text"), "Parse INI-style config text.");
  m.def("load_config", &load_config, py::arg("path"));

  m.def("simulate", &simulate, py::arg("config"),
        "One trajectory: times, v and psi snapshots, and E(u) at each snapshot.");

  m.def("dpd_nonlinearity", py::vectorize(static_cast<Complex (*)(Complex, Complex) noexcept>(&dpd_nonlinearity)),
        py::arg("v"), py::arg("psi"));

  m.def(
      "noise_statistics",
      [](const RunConfig& config) {
        NoiseStatistics s;
        {
          py::gil_scoped_release release;
          s = noise_statistics(config);
        }
        py::dict d;
        d["t"] = s.t;
        d["hs_h1"] = s.hs_h1;
        d["h1_expected"] = s.h1_expected;
        d["h1_moment"] = moment(s.h1_moment);
        d["h1_sup_moment"] = moment(s.h1_sup_moment);
        d["doubled_h1_moment"] = moment(s.doubled_h1_moment);
        d["doubled_ratio"] = moment(s.doubled_ratio);
        return d;
      },
      py::arg("config"));

  m.def(
      "convergence_study",
      [](const RunConfig& config, const std::vector<double>& dts) {
        ConvergenceStudy s;
        {
          py::gil_scoped_release release;
          s = convergence_study(config, dts);
        }
        py::dict d;
        d["dts"] = s.dts;
        d["error_vs_finest"] = s.error_vs_finest;
        d["successive_difference"] = s.successive_difference;
        d["observed_order"] = s.observed_order;
        d["order_vs_finest"] = s.order_vs_finest;
        return d;
      },
      py::arg("config"), py::arg("dts"));
}
