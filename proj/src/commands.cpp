#include "symirk/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "symirk/errors.hpp"
#include "symirk/numeric_text.hpp"

namespace symirk {
namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class OutputDir {
 public:
  explicit OutputDir(const RunManifest& m) : dir_(m.out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("output.dir", "cannot create '" + m.out_dir + "': " + ec.message());
    std::ofstream probe(dir_ / "manifest.txt");
    if (!probe) throw ConfigError("output.dir", "'" + m.out_dir + "' is not writable");
    probe << emit_manifest(m);
    if (!probe) throw ConfigError("output.dir", "failed writing to '" + m.out_dir + "'");
  }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) const {
    const fs::path path = dir_ / name;
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    writer(os);
    os.flush();
    if (!os) throw Error("failed writing " + path.string());
  }

 private:
  fs::path dir_;
};

struct Setup {
  Problem problem;
  IntegrationConfig cfg;
  MachineTableau tableau;
};

Setup prepare(const RunManifest& m, const CommandLog& log) {
  ensure_round_to_nearest();
  m.validate();
  Setup s{load_problem(m), m.integration(), {}};
  s.tableau = make_method(m.stages, s.cfg.h);
  log.info("problem " + s.problem.system.label + ", s = " + std::to_string(m.stages) + ", h = " + m.h_text +
           " rounded to " + exact_literal(s.cfg.h) + " (" + g17(s.cfg.h) + "), " + std::to_string(s.cfg.n_steps) +
           " steps");
  return s;
}

void write_counters(std::ostream& os, const std::string& prefix, const IterationCounters& c) {
  os << prefix << "steps," << c.steps << '\n'
     << prefix << "fixed_point_steps," << c.fixed_point << '\n'
     << prefix << "criterion_steps," << c.criterion << '\n'
     << prefix << "fallback_steps," << c.fallback << '\n'
     << prefix << "fixed_point_percentage," << g17(c.fixed_point_percentage()) << '\n'
     << prefix << "mean_iterations," << g17(c.mean_iterations()) << '\n'
     << prefix << "max_iterations," << c.max_iterations_seen << '\n';
}

void write_run_header(std::ostream& os, const RunManifest& m, const IntegrationConfig& cfg) {
  os << "quantity,value\n"
     << "problem," << m.problem << '\n'
     << "stages," << m.stages << '\n'
     << "h," << m.h_text << '\n'
     << "h_rounded," << exact_literal(cfg.h) << '\n'
     << "n_steps," << cfg.n_steps << '\n'
     << "sample_every," << cfg.sample_every << '\n';
}

std::string summary(const IterationCounters& c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.2f%% fixed-point steps, %.2f iterations per step", c.fixed_point_percentage(),
                c.mean_iterations());
  return buf;
}

}  // namespace

int verbosity_from_env() {
  const char* v = std::getenv("SYMIRK_VERBOSE");
  if (v == nullptr || *v == '\0') return 0;
  return std::atoi(v);
}

void CommandLog::info(const std::string& msg) const {
  if (verbosity >= 1) out << msg << '\n';
}

void CommandLog::detail(const std::string& msg) const {
  if (verbosity >= 2) out << msg << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  const std::size_t d = t.samples.empty() ? 0 : t.samples.front().main.size();
  os << "step,time";
  for (std::size_t j = 0; j < d; ++j) os << ",y" << j;
  for (std::size_t j = 0; j < d; ++j) os << ",e" << j;
  os << ",energy,rel_energy_error,iterations,termination\n";
  const Quad h0 = t.samples.empty() ? Quad(1) : t.samples.front().energy;
  for (const Sample& s : t.samples) {
    os << s.step << ',' << g17(s.time);
    for (double v : s.main) os << ',' << g17(v);
    for (double v : s.residual) os << ',' << g17(v);
    os << ',' << g17(static_cast<double>(s.energy)) << ',' << g17(static_cast<double>((s.energy - h0) / h0)) << ','
       << s.iterations << ',' << to_string(s.termination) << '\n';
  }
}

bool cmd_coeffs(std::size_t stages, bool hex, std::ostream& out) {
  if (stages < 1 || stages > kMaxStages) {
    throw ConfigError("stages", "must be in [1, " + std::to_string(kMaxStages) + "]");
  }
  const GaussTableau g = generate_gauss(stages);
  const MachineTableau t = make_machine_tableau(g);
  out << format_tableau(t, hex);
  const bool ok = is_bitwise_symplectic(t);
  out << "# symplecticity self-check: " << (ok ? "PASS" : "FAIL") << '\n';
  return ok;
}

void cmd_integrate(const RunManifest& m, const CommandLog& log) {
  const Setup s = prepare(m, log);
  const OutputDir out(m);
  const Trajectory traj = integrate(s.problem.system, s.tableau, s.cfg, s.problem.y0);
  out.write("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  out.write("diagnostics.csv", [&](std::ostream& os) {
    write_run_header(os, m, s.cfg);
    write_counters(os, "", traj.counters);
  });
  log.info(summary(traj.counters));
}

void cmd_estimate(const RunManifest& m, const CommandLog& log) {
  if (m.estimator_mode == EstimatorMode::Off) {
    throw ConfigError("estimator.mode", "command requires estimator mode parallel or sequential");
  }
  const Setup s = prepare(m, log);
  const OutputDir out(m);
  const EstimateResult res = integrate_with_estimate(s.problem.system, s.tableau, s.cfg, s.problem.y0);
  out.write("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, res.trajectory); });
  out.write("secondary.csv", [&](std::ostream& os) { write_trajectory_csv(os, res.secondary); });
  out.write("estimate.csv", [&](std::ostream& os) {
    const std::size_t d = s.problem.system.dimension;
    os << "step,time";
    for (std::size_t j = 0; j < d; ++j) os << ",est" << j;
    os << ",position_norm\n";
    for (const EstimateSample& e : res.estimate.samples) {
      os << e.step << ',' << g17(e.time);
      for (double v : e.estimate) os << ',' << g17(v);
      os << ',' << g17(e.position_norm) << '\n';
    }
  });
  out.write("diagnostics.csv", [&](std::ostream& os) {
    write_run_header(os, m, s.cfg);
    os << "estimator_mode," << to_string(m.estimator_mode) << '\n' << "estimator_r," << m.r << '\n';
    write_counters(os, "", res.trajectory.counters);
    write_counters(os, "secondary_", res.secondary.counters);
  });
  log.info("primary: " + summary(res.trajectory.counters));
  log.info("secondary: " + summary(res.secondary.counters));
}

void cmd_ensemble(const RunManifest& m, const CommandLog& log) {
  const Setup s = prepare(m, log);
  const OutputDir out(m);
  const EnsembleSpec spec = m.ensemble();
  log.info("ensemble of " + std::to_string(spec.P) + " members, seed " + std::to_string(spec.seed));
  const auto runs = run_ensemble(
      s.problem.y0, spec,
      [&](const CompensatedVector& y0, int member) {
        Trajectory t = integrate(s.problem.system, s.tableau, s.cfg, y0);
        log.detail("member " + std::to_string(member) + ": " + summary(t.counters));
        return t;
      },
      m.threads);

  std::vector<double> jumps;
  std::vector<std::vector<double>> errors;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const JumpSample& j : energy_jumps(runs[r], static_cast<int>(r))) jumps.push_back(static_cast<double>(j.value));
    std::vector<double> e;
    for (Quad v : relative_energy_error(runs[r])) e.push_back(static_cast<double>(v));
    errors.push_back(std::move(e));
  }
  std::vector<double> times;
  for (const Sample& smp : runs.front().samples) times.push_back(smp.time);

  const Histogram hist = energy_jump_histogram(jumps, m.bins);
  const DriftWalkFit fit = drift_and_walk_fit(errors, times);
  const Moments mom = moments(jumps);
  const IterationStats its = iteration_stats(runs);

  out.write("jumps.csv", [&](std::ostream& os) {
    os << "run,k,jump\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (const JumpSample& j : energy_jumps(runs[r], static_cast<int>(r))) {
        os << j.run << ',' << j.k << ',' << g17(static_cast<double>(j.value)) << '\n';
      }
    }
  });
  out.write("histogram.csv", [&](std::ostream& os) { write_histogram_csv(os, hist); });
  out.write("drift.csv", [&](std::ostream& os) { write_drift_csv(os, fit); });
  out.write("fit_summary.csv", [&](std::ostream& os) { write_fit_summary_csv(os, fit, mom, spec); });
  out.write("iterations.csv", [&](std::ostream& os) { write_iteration_csv(os, its); });
  log.info("jumps: mean " + g17(mom.mean) + ", sd " + g17(mom.sd));
  log.info("walk exponent " + (fit.alpha ? g17(*fit.alpha) : std::string("undefined")));
}

void cmd_decompose(const RunManifest& m, const CommandLog& log) {
  const Setup s = prepare(m, log);
  const OracleConfig ocfg = m.oracle();
  const OutputDir out(m);
  const GaussTableau g = generate_gauss(m.stages, std::max<long>(kDefaultTableauBits, ocfg.bits + 64));
  MachineTableau t = make_machine_tableau(g);
  t.hb = precompute_hb(t, g, s.cfg.h);
  t.h = s.cfg.h;
  log.info("reference run, variant " + m.oracle_variant + " at " + std::to_string(ocfg.bits) + " bits");
  const Trajectory traj = oracle_integrate(s.problem.system, g, t, ocfg, s.cfg, s.problem.y0);
  out.write("oracle_trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  out.write("energy_error.csv", [&](std::ostream& os) {
    os << "step,time,rel_energy_error\n";
    const auto err = relative_energy_error(traj);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
      os << traj.samples[k].step << ',' << g17(traj.samples[k].time) << ',' << g17(static_cast<double>(err[k]))
         << '\n';
    }
  });
  out.write("diagnostics.csv", [&](std::ostream& os) {
    write_run_header(os, m, s.cfg);
    os << "oracle_variant," << m.oracle_variant << '\n' << "oracle_bits," << ocfg.bits << '\n';
    write_counters(os, "", traj.counters);
  });
  log.info(summary(traj.counters));
}

}  // namespace symirk
