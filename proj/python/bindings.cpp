#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "symirk/coefficients.hpp"
#include "symirk/compensated.hpp"
#include "symirk/errors.hpp"
#include "symirk/irk.hpp"
#include "symirk/manifest.hpp"
#include "symirk/oracle.hpp"
#include "symirk/problems.hpp"
#include "symirk/stats.hpp"

namespace py = pybind11;
using namespace symirk;

namespace {

IntegrationConfig make_config(double h, std::int64_t n_steps, std::int64_t sample_every) {
  IntegrationConfig c;
  c.h = h;
  c.n_steps = n_steps;
  c.sample_every = sample_every;
  return c;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::list step, time, main, residual, energy_error, iterations, termination;
  const Quad h0 = t.samples.empty() ? Quad(1) : t.samples.front().energy;
  for (const Sample& s : t.samples) {
    step.append(s.step);
    time.append(s.time);
    main.append(s.main);
    residual.append(s.residual);
    energy_error.append(static_cast<double>((s.energy - h0) / h0));
    iterations.append(s.iterations);
    termination.append(to_string(s.termination));
  }
  py::dict d;
  d["label"] = t.label;
  d["h"] = t.h;
  d["step"] = step;
  d["time"] = time;
  d["main"] = main;
  d["residual"] = residual;
  d["rel_energy_error"] = energy_error;
  d["iterations"] = iterations;
  d["termination"] = termination;
  d["fixed_point_percentage"] = t.counters.fixed_point_percentage();
  d["mean_iterations"] = t.counters.mean_iterations();
  d["steps"] = t.counters.steps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Symplectic Gauss IRK integration with controlled round-off";

  py::register_exception<Error>(m, "SymirkError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "machine_tableau",
      [](std::size_t s) {
        const MachineTableau t = make_machine_tableau(generate_gauss(s));
        std::vector<std::vector<double>> mu(s, std::vector<double>(s));
        for (std::size_t i = 0; i < s; ++i) {
          for (std::size_t j = 0; j < s; ++j) mu[i][j] = t.mu(i, j);
        }
        py::dict d;
        d["b"] = t.b_tilde;
        d["mu"] = mu;
        d["symplectic"] = is_bitwise_symplectic(t);
        return d;
      },
      py::arg("stages"));

  m.def(
      "format_tableau", [](std::size_t s, bool hex) { return format_tableau(make_machine_tableau(generate_gauss(s)), hex); },
      py::arg("stages"), py::arg("hex") = false);

  m.def("round_reduced", &round_reduced, py::arg("x"), py::arg("r"));

  m.def(
      "kahan_accumulate",
      [](std::vector<double> main, std::vector<double> residual, const std::vector<std::vector<double>>& terms) {
        const CompensatedVector out =
            kahan_accumulate(CompensatedVector(std::move(main), std::move(residual)), terms);
        return py::make_tuple(out.main, out.residual);
      },
      py::arg("main"), py::arg("residual"), py::arg("terms"));

  m.def(
      "integrate",
      [](const std::string& problem, double h, std::int64_t n_steps, std::int64_t sample_every, std::size_t stages) {
        const Problem p = load_named_problem(problem);
        py::gil_scoped_release release;
        const Trajectory t = integrate(p.system, make_method(stages, h), make_config(h, n_steps, sample_every), p.y0);
        py::gil_scoped_acquire acquire;
        return trajectory_dict(t);
      },
      py::arg("problem"), py::arg("h"), py::arg("n_steps"), py::arg("sample_every") = 1, py::arg("stages") = 6);

  m.def(
      "estimate",
      [](const std::string& problem, double h, std::int64_t n_steps, std::int64_t sample_every, int r,
         const std::string& mode) {
        const Problem p = load_named_problem(problem);
        IntegrationConfig cfg = make_config(h, n_steps, sample_every);
        cfg.estimator_r = r;
        cfg.estimator_mode = parse_estimator_mode(mode);
        EstimateResult res;
        {
          py::gil_scoped_release release;
          res = integrate_with_estimate(p.system, make_method(6, h), cfg, p.y0);
        }
        py::list est, norm;
        for (const EstimateSample& e : res.estimate.samples) {
          est.append(e.estimate);
          norm.append(e.position_norm);
        }
        py::dict d;
        d["trajectory"] = trajectory_dict(res.trajectory);
        d["secondary"] = trajectory_dict(res.secondary);
        d["estimate"] = est;
        d["position_norm"] = norm;
        return d;
      },
      py::arg("problem"), py::arg("h"), py::arg("n_steps"), py::arg("sample_every") = 1, py::arg("r") = 3,
      py::arg("mode") = "sequential");

  m.def(
      "reference",
      [](const std::string& problem, const std::string& variant, double h, std::int64_t n_steps,
         std::int64_t sample_every, long bits) {
        const Problem p = load_named_problem(problem);
        const GaussTableau g = generate_gauss(6, std::max<long>(kDefaultTableauBits, bits + 64));
        MachineTableau t = make_machine_tableau(g);
        t.hb = precompute_hb(t, g, h);
        t.h = h;
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = oracle_integrate(p.system, g, t, OracleConfig::preset(variant, bits), make_config(h, n_steps, sample_every),
                                p.y0);
        }
        return trajectory_dict(tr);
      },
      py::arg("problem"), py::arg("variant"), py::arg("h"), py::arg("n_steps"), py::arg("sample_every") = 1,
      py::arg("bits") = kQuadDigits);

  m.def(
      "moments",
      [](const std::vector<double>& v) {
        const Moments mo = moments(v);
        py::dict d;
        d["n"] = mo.n;
        d["mean"] = mo.mean;
        d["sd"] = mo.sd;
        d["skewness"] = mo.skewness;
        d["excess_kurtosis"] = mo.excess_kurtosis;
        return d;
      },
      py::arg("samples"));

  m.def(
      "manifest_roundtrip", [](const std::string& text) { return emit_manifest(parse_manifest(text)); },
      py::arg("text"));
}
