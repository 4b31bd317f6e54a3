#include <algorithm>
#include <span>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ksapprox/ensemble.hpp"
#include "ksapprox/error.hpp"
#include "ksapprox/kernels.hpp"
#include "ksapprox/ks_transform.hpp"
#include "ksapprox/poisson_path.hpp"
#include "ksapprox/quad_oracle.hpp"

namespace py = pybind11;
using namespace ksapprox;

namespace {

ApproxParams make_params(double epsilon, double theta, std::optional<double> tail_tol,
                         std::optional<double> truncation_radius, double quad_tol, double max_expected_events) {
  ApproxParams p;
  p.epsilon = epsilon;
  p.theta = Theta(theta);
  p.tail_tol = tail_tol;
  p.truncation_radius = truncation_radius;
  p.quad_tol = quad_tol;
  p.max_expected_events = max_expected_events;
  return p;
}

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict channel_dict(const ChannelStats& c) {
  py::dict d;
  d["mean"] = c.mean;
  d["se_mean"] = c.se_mean;
  d["cov"] = c.cov;
  d["se_cov"] = c.se_cov;
  d["m2"] = c.m2;
  d["se_m2"] = c.se_m2;
  d["m4"] = c.m4;
  d["se_m4"] = c.se_m4;
  std::vector<double> composite;
  for (const auto& n : c.normality) composite.push_back(n.composite);
  d["normality"] = composite;
  return d;
}

py::dict stats_dict(const EnsembleStats& s) {
  py::dict d;
  d["grid"] = s.grid;
  d["replicas"] = s.replicas;
  d["epsilon"] = s.epsilon;
  d["theta"] = s.theta;
  d["truncation_radius"] = s.truncation_radius;
  d["seed"] = s.master_seed;
  d["mode"] = to_string(s.mode);
  py::dict channels;
  for (const auto& c : s.channels) channels[py::str(c.name)] = channel_dict(c);
  d["channels"] = channels;
  if (s.cross_cov.size() > 0) {
    d["cross_cov"] = s.cross_cov;
    d["se_cross"] = s.se_cross;
  }
  if (s.raw) {
    py::dict raw;
    for (std::size_t i = 0; i < s.raw->channel_names.size(); ++i) raw[py::str(s.raw->channel_names[i])] = s.raw->values[i];
    d["raw"] = raw;
  }
  return d;
}

EnsembleMode parse_mode(const std::string& m) {
  if (m == "single") return EnsembleMode::single_channel;
  if (m == "dual") return EnsembleMode::dual_channel;
  if (m == "decomposition") return EnsembleMode::decomposition;
  throw std::invalid_argument("mode must be single, dual or decomposition");
}

CovKind parse_cov(const std::string& k) {
  if (k == "fbm") return CovKind::fbm;
  if (k == "sub-fbm") return CovKind::sub_fbm;
  if (k == "lei-nualart-x") return CovKind::lei_nualart_x;
  throw std::invalid_argument("model must be fbm, sub-fbm or lei-nualart-x");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Poisson-driven approximations of fBm, sub-fBm and the Lei-Nualart process";

  py::register_exception<SingularPoint>(m, "SingularPoint", PyExc_ValueError);
  py::register_exception<UnsupportedParameter>(m, "UnsupportedParameter", PyExc_ValueError);
  py::register_exception<InvalidCombination>(m, "InvalidCombination", PyExc_ValueError);
  py::register_exception<HorizonGuard>(m, "HorizonGuard", PyExc_RuntimeError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);
  py::register_exception<ReplicaFailure>(m, "ReplicaFailure", PyExc_RuntimeError);

  py::class_<KernelSpec>(m, "Kernel")
      .def_static("fbm", &KernelSpec::fbm_volterra, py::arg("H"), py::arg("quad_tol") = kDefaultKernelQuadTol)
      .def_static("lei_nualart", &KernelSpec::lei_nualart, py::arg("H"))
      .def_static(
          "tabulated",
          [](std::vector<double> grid, std::vector<double> values, const std::string& interpolation, bool gate) {
            TabulatedTable t;
            t.grid = std::move(grid);
            t.values = std::move(values);
            if (interpolation == "linear") {
              t.interpolation = Interpolation::linear;
            } else if (interpolation == "step") {
              t.interpolation = Interpolation::step;
            } else {
              throw std::invalid_argument("interpolation must be linear or step");
            }
            t.gate_at_t = gate;
            return KernelSpec::tabulated(std::move(t));
          },
          py::arg("grid"), py::arg("values"), py::arg("interpolation") = "linear", py::arg("gate_at_t") = false)
      .def("__call__", &KernelSpec::operator(), py::arg("t"), py::arg("s"))
      .def_property_readonly("hurst", &KernelSpec::hurst)
      .def("__repr__", &KernelSpec::describe);

  m.def("cov", [](const std::string& model, double H, double t, double s) { return cov({parse_cov(model), H}, t, s); },
        py::arg("model"), py::arg("H"), py::arg("t"), py::arg("s"));
  m.def(
      "decomposition_constant",
      [](double H) {
        return decomposition_constant(H, H < 1.0 ? DecompositionRegime::sub_from_fbm : DecompositionRegime::fbm_from_sub);
      },
      py::arg("H"));
  m.def(
      "validate_theta",
      [](double theta, double H) {
        const auto r = validate_theta(theta, H);
        py::dict d;
        d["admissible"] = r.admissible;
        d["violated_indices"] = r.violated_indices;
        d["reason"] = r.reason;
        return d;
      },
      py::arg("theta"), py::arg("H"));

  m.def("kernel_inner_product", &oracle::kernel_inner_product, py::arg("kernel"), py::arg("t"), py::arg("s"),
        py::arg("tol") = 1e-9);

  m.def(
      "poisson_jumps",
      [](double horizon, std::uint64_t seed, std::uint64_t stream) {
        const auto p = PoissonPath::simulate(horizon, seed, stream);
        return to_array(p.jump_times());
      },
      py::arg("horizon"), py::arg("seed"), py::arg("stream") = 0);

  m.def(
      "transform",
      [](const KernelSpec& kernel, std::vector<double> grid, double epsilon, double theta, std::uint64_t seed,
         std::uint64_t stream, std::optional<double> tail_tol, std::optional<double> truncation_radius,
         double quad_tol, double max_expected_events) {
        const Transformer tr(kernel, std::move(grid),
                             make_params(epsilon, theta, tail_tol, truncation_radius, quad_tol, max_expected_events));
        auto v = [&] {
          py::gil_scoped_release release;
          return tr.simulate(seed, stream);
        }();
        return py::make_tuple(to_array(v.cos_values), to_array(v.sin_values));
      },
      py::arg("kernel"), py::arg("grid"), py::arg("epsilon"), py::arg("theta"), py::arg("seed"),
      py::arg("stream") = 0, py::arg("tail_tol") = py::none(), py::arg("truncation_radius") = py::none(),
      py::arg("quad_tol") = 1e-8, py::arg("max_expected_events") = 1e9);

  m.def(
      "run_ensemble",
      [](const KernelSpec& kernel, std::vector<double> grid, double epsilon, double theta, std::size_t replicas,
         std::uint64_t seed, const std::string& mode, unsigned threads, std::optional<double> tail_tol,
         std::optional<double> truncation_radius, double quad_tol, double max_expected_events) {
        EnsembleConfig cfg;
        cfg.kernel = kernel;
        cfg.grid = std::move(grid);
        cfg.params = make_params(epsilon, theta, tail_tol, truncation_radius, quad_tol, max_expected_events);
        cfg.replicas = replicas;
        cfg.master_seed = seed;
        cfg.mode = parse_mode(mode);
        cfg.threads = threads;
        auto stats = [&] {
          py::gil_scoped_release release;
          return run(cfg);
        }();
        return stats_dict(stats);
      },
      py::arg("kernel"), py::arg("grid"), py::arg("epsilon"), py::arg("theta"), py::arg("replicas"),
      py::arg("seed"), py::arg("mode") = "dual", py::arg("threads") = 1, py::arg("tail_tol") = py::none(),
      py::arg("truncation_radius") = py::none(), py::arg("quad_tol") = 1e-8,
      py::arg("max_expected_events") = 1e9);
}
