#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "netform/cli.hpp"
#include "netform/dyadic.hpp"
#include "netform/error.hpp"
#include "netform/exact_chain.hpp"
#include "netform/ident.hpp"
#include "netform/io.hpp"
#include "netform/likelihood.hpp"
#include "netform/tau.hpp"

namespace py = pybind11;
using namespace netform;

namespace {

ParamVector to_params(const std::vector<double>& beta) {
  return ParamVector(ParamVector::k_for_size(beta.size()), beta);
}

// N from a state-space dimension 2^{N(N-1)}.
std::size_t agents_for_dim(Eigen::Index dim) {
  for (std::size_t n = 1; n <= 4; ++n)
    if (Eigen::Index{1} << (n * (n - 1)) == dim) return n;
  throw ConfigError("matrix dimension is not 2^{N(N-1)} for N <= 4");
}

TransitionMatrix to_transition(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ConfigError("transition matrix must be square");
  return {agents_for_dim(m.rows()), m};
}

const Observation& observation(const NetworkPanel& p, std::size_t c) {
  if (c >= p.size()) throw py::index_error("network index out of range");
  return p.observations[c];
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Strategic network formation: exact chains, identification and estimation";
  m.attr("__version__") = version_string();

  static py::handle base = py::exception<Error>(m, "NetformError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(base)(e.what());
      err.attr("category") = static_cast<int>(e.category());
      PyErr_SetObject(base.ptr(), err.ptr());
    }
  });

  py::class_<NetworkPanel>(m, "Panel")
      .def("__len__", &NetworkPanel::size)
      .def_property_readonly("k", &NetworkPanel::k)
      .def_property_readonly("ids",
                             [](const NetworkPanel& p) {
                               std::vector<std::string> out;
                               for (const auto& o : p.observations) out.push_back(o.id);
                               return out;
                             })
      .def_property_readonly("covariate_names",
                             [](const NetworkPanel& p) {
                               return p.empty() ? std::vector<std::string>{}
                                                : p.observations.front().covariates.names();
                             })
      .def("sizes",
           [](const NetworkPanel& p) {
             std::vector<std::size_t> out;
             for (const auto& o : p.observations) out.push_back(o.baseline.size());
             return out;
           })
      .def("baseline", [](const NetworkPanel& p, std::size_t c) { return observation(p, c).baseline.code(); })
      .def("followup", [](const NetworkPanel& p, std::size_t c) { return observation(p, c).followup.code(); })
      .def("param_names",
           [](const NetworkPanel& p) {
             const auto names = p.empty() ? std::vector<std::string>{} : p.observations.front().covariates.names();
             return ParamVector(names.size()).names(names);
           })
      .def("save", &save_panel, py::arg("networks"), py::arg("covariates"));

  m.def(
      "load_panel",
      [](const std::string& networks, const std::string& covariates, std::vector<std::string> attributes,
         std::vector<std::string> categorical, std::string order_column) {
        CovariateSpec spec;
        spec.attributes = std::move(attributes);
        spec.categorical = std::move(categorical);
        spec.order_column = std::move(order_column);
        return load_panel(networks, covariates, spec);
      },
      py::arg("networks"), py::arg("covariates"), py::arg("attributes") = std::vector<std::string>{},
      py::arg("categorical") = std::vector<std::string>{}, py::arg("order_column") = "class_list");

  m.def(
      "estimate_tau",
      [](const NetworkPanel& p) {
        const auto t = estimate_tau(p);
        py::dict d;
        d["tau_hat"] = t.tau_hat;
        d["bound_violations"] = t.bound_violations;
        d["distances"] = t.distances;
        return d;
      },
      py::arg("panel"));

  m.def(
      "panel_loglik",
      [](const NetworkPanel& p, const std::vector<double>& beta, std::size_t tau, std::size_t node_budget) {
        LikelihoodOptions opt;
        opt.node_budget = node_budget;
        py::gil_scoped_release release;
        return panel_loglik(p, to_params(beta), {}, tau, opt);
      },
      py::arg("panel"), py::arg("beta"), py::arg("tau"), py::arg("node_budget") = 10'000'000);

  m.def(
      "transition_matrix",
      [](const NetworkPanel& p, std::size_t c, const std::vector<double>& beta) {
        return build_transition(observation(p, c).covariates, to_params(beta)).entries;
      },
      py::arg("panel"), py::arg("network"), py::arg("beta"));

  m.def(
      "matrix_power",
      [](const Eigen::MatrixXd& pi, std::size_t tau) { return matrix_power(to_transition(pi), tau).entries; },
      py::arg("matrix"), py::arg("tau"));

  m.def(
      "stationary", [](const Eigen::MatrixXd& pi) { return stationary(to_transition(pi)).pi; },
      py::arg("matrix"));

  m.def(
      "gamma_to_pi",
      [](const std::array<double, 8>& x) {
        GammaVector g;
        g.x = x;
        return gamma_to_pi(g).entries;
      },
      py::arg("gamma"));

  m.def(
      "recover_gamma",
      [](const Eigen::MatrixXd& pi) {
        std::vector<std::array<double, 8>> out;
        for (const auto& g : recover_gamma(to_transition(pi)).solutions) out.push_back(g.x);
        return out;
      },
      py::arg("matrix"), "Every admissible gamma reproducing a 4x4 transition matrix.");

  m.def(
      "dyadic_regression",
      [](const NetworkPanel& p, bool fixed_effects, bool instrument) {
        const auto fit = dyadic_ols(dyad_frame(p, instrument), {fixed_effects});
        py::dict d;
        d["names"] = fit.names;
        d["coef"] = fit.coef;
        d["se"] = fit.se;
        d["r2"] = fit.r2;
        d["n"] = fit.n;
        d["clusters"] = fit.clusters;
        return d;
      },
      py::arg("panel"), py::arg("fixed_effects") = true, py::arg("instrument") = false);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "netform");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
