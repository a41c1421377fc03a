#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "almpinn/config.hpp"
#include "almpinn/loss.hpp"
#include "almpinn/metrics.hpp"
#include "almpinn/network.hpp"
#include "almpinn/problems.hpp"
#include "almpinn/train.hpp"

namespace py = pybind11;
using namespace almpinn;
using namespace pybind11::literals;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

// Keys are the config-file keys, values anything str() can render.
RunConfig make_config(const py::dict& entries, Mode mode) {
  RunConfig c = mode == Mode::kInverse ? inverse_defaults() : RunConfig{};
  ConfigMap map;
  for (auto [k, v] : entries) {
    std::string value = py::isinstance<py::bool_>(v) ? (v.cast<bool>() ? "true" : "false") : py::str(v).cast<std::string>();
    map[k.cast<std::string>()] = value;
  }
  apply_config(map, c);
  c.validate();
  return c;
}

py::dict summarize(const RunResult& r, const RunConfig& c) {
  const ProblemSpec problem = make_problem(c.problem, c.problem_options);
  const ErrorReport rep = evaluate_on_grid(r.best_model, problem).report;
  py::dict d;
  d["eps_r"] = rep.eps_r;
  d["eps_inf"] = rep.eps_inf;
  d["eps_a"] = rep.eps_a;
  d["best_loss"] = r.best_loss;
  d["best_gover_loss"] = r.best_gover_loss;
  d["best_step"] = r.best_step;
  d["steps"] = r.steps;
  d["stop_reason"] = r.stop_reason;
  d["lambda"] = r.final_state.lambda;
  d["mu"] = r.final_state.mu;
  std::vector<double> step, total, gover;
  for (const HistoryRow& h : r.history) {
    step.push_back(static_cast<double>(h.step));
    total.push_back(h.loss.total);
    gover.push_back(h.loss.gover_loss);
  }
  d["history"] = py::dict("step"_a = to_array(step), "total"_a = to_array(total), "gover"_a = to_array(gover));
  d["best_model"] = r.best_model;
  if (c.mode == Mode::kInverse) {
    d["v"] = r.v_final;
    d["error_v"] = r.v_rel_error;
    d["v_best"] = r.v_best;
    d["error_v_best"] = r.v_best_rel_error;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Augmented-Lagrangian physics-informed networks";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<CheckpointError>(m, "CheckpointError", base.ptr());
  py::register_exception<UnknownProblem>(m, "UnknownProblem", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());

  py::class_<Network>(m, "Network")
      .def_property_readonly("layer_sizes", &Network::layer_sizes)
      .def_property_readonly("parameter_count", &Network::parameter_count)
      .def_property("coeffs", py::overload_cast<>(&Network::coeffs, py::const_), &Network::set_coeffs)
      .def("flatten", [](const Network& n) { return to_array(n.flatten()); })
      .def("assign", [](Network& n, const Array& p) { n.assign(to_vector(p)); })
      .def(
          "__call__",
          [](const Network& n, const Array& x, const Array& t) {
            if (x.size() != t.size()) throw InvalidArgument("x and t differ in length");
            std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(x.size()));
            for (py::ssize_t i = 0; i < x.size(); ++i) pts[static_cast<std::size_t>(i)] = {x.data()[i], t.data()[i]};
            return to_array(evaluate_points(n, pts));
          },
          "x"_a, "t"_a);

  m.def(
      "init_network",
      [](const std::vector<int>& layers, std::uint64_t seed, const std::string& problem) {
        return init_network(layers, seed, make_problem(problem).domain);
      },
      "layers"_a, "seed"_a = 0, "problem"_a = "nl1d");
  m.def(
      "save_checkpoint",
      [](const Network& n, const std::filesystem::path& path, const std::string& problem, std::int64_t iteration) {
        save_checkpoint(n, {problem, iteration, {}}, path);
      },
      "net"_a, "path"_a, "problem"_a, "iteration"_a = 0);
  m.def(
      "load_checkpoint", [](const std::filesystem::path& path) { return load_checkpoint(path).net; }, "path"_a);

  m.def(
      "exact",
      [](const std::string& problem, const Array& x, const Array& t) {
        if (x.size() != t.size()) throw InvalidArgument("x and t differ in length");
        const ProblemSpec p = make_problem(problem);
        std::vector<double> out(static_cast<std::size_t>(x.size()));
        for (py::ssize_t i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = p.exact(x.data()[i], t.data()[i]);
        return to_array(out);
      },
      "problem"_a, "x"_a, "t"_a);
  m.def(
      "residual",
      [](const std::string& problem, double x, double t, std::array<double, 2> v) {
        const ProblemSpec p = make_problem(problem);
        return p.residual(p.exact_jet(x, t), v);
      },
      "problem"_a, "x"_a, "t"_a, "v"_a, "PDE residual of the exact solution at one point.");
  m.def(
      "true_v", [](const std::string& problem) { return make_problem(problem).true_v; }, "problem"_a);

  m.def(
      "data_term",
      [](const std::string& kind, const Array& pred, const Array& obs, std::optional<double> param) {
        DataTerm term = DataTerm::standard(parse_data_term(kind));
        if (param) term.param = *param;
        return evaluate_data_term(term, to_vector(pred), to_vector(obs)).value;
      },
      "kind"_a, "pred"_a, "obs"_a, "param"_a = py::none());

  m.def(
      "error_report",
      [](const Array& pred, const Array& exact) {
        const ErrorReport r = error_report(to_vector(pred), to_vector(exact));
        return py::dict("eps_r"_a = r.eps_r, "eps_inf"_a = r.eps_inf, "eps_a"_a = r.eps_a);
      },
      "predicted"_a, "exact"_a);
  m.def(
      "evaluate_on_grid",
      [](const Network& n, const std::string& problem, int nx, int nt) {
        const GridEvaluation g = evaluate_on_grid(n, make_problem(problem), nx, nt);
        return py::dict("x"_a = to_array(g.x), "t"_a = to_array(g.t), "predicted"_a = to_array(g.predicted),
                        "exact"_a = to_array(g.exact), "eps_r"_a = g.report.eps_r);
      },
      "net"_a, "problem"_a, "nx"_a = 100, "nt"_a = 100);

  m.def(
      "solve",
      [](const py::dict& config) {
        const RunConfig c = make_config(config, Mode::kForward);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = train_forward(c);
        }
        return summarize(r, c);
      },
      "config"_a = py::dict(), "Train a forward solution; config keys as in the config file.");
  m.def(
      "invert",
      [](const Network& pretrained, const py::dict& config) {
        const RunConfig c = make_config(config, Mode::kInverse);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = train_inverse(c, pretrained);
        }
        return summarize(r, c);
      },
      "pretrained"_a, "config"_a, "Recover the PDE coefficients starting from a forward network.");
}
