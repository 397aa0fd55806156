#include "symirk/irk.hpp"

#include <algorithm>
#include <future>

#include "symirk/errors.hpp"

namespace symirk {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::None:
      return "none";
    case Termination::FixedPoint:
      return "fixed-point";
    case Termination::Criterion:
      return "criterion";
    case Termination::FallbackAccepted:
      return "fallback-accepted";
  }
  return "unknown";
}

std::string to_string(EstimatorMode m) {
  switch (m) {
    case EstimatorMode::Off:
      return "off";
    case EstimatorMode::Parallel:
      return "parallel";
    case EstimatorMode::Sequential:
      return "sequential";
  }
  return "unknown";
}

EstimatorMode parse_estimator_mode(const std::string& s) {
  if (s == "off") return EstimatorMode::Off;
  if (s == "parallel") return EstimatorMode::Parallel;
  if (s == "sequential") return EstimatorMode::Sequential;
  throw ConfigError("estimator.mode", "expected off, parallel or sequential, got '" + s + "'");
}

void IntegrationConfig::validate() const {
  if (!std::isfinite(h) || !(h > 0)) throw ConfigError("h", "step size must be finite and > 0");
  if (n_steps < 0) throw ConfigError("n_steps", "must be >= 0");
  if (sample_every < 1 || (n_steps > 0 && sample_every > n_steps)) {
    throw ConfigError("sample_every", "must satisfy 1 <= sample_every <= n_steps");
  }
  if (max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
  if (!(fallback_abs_tol >= 0) || !(fallback_rel_tol >= 0)) {
    throw ConfigError("fallback_tol", "tolerances must be non-negative");
  }
  if (streak_required < 1) throw ConfigError("streak_required", "must be >= 1");
  if (estimator_r < 0 || estimator_r >= kMachineDigits) throw ConfigError("estimator_r", "must be in [0, 53)");
}

void IterationCounters::record(int iterations, Termination t) {
  ++steps;
  total_iterations += iterations;
  max_iterations_seen = std::max(max_iterations_seen, iterations);
  switch (t) {
    case Termination::FixedPoint:
      ++fixed_point;
      break;
    case Termination::Criterion:
      ++criterion;
      break;
    case Termination::FallbackAccepted:
      ++fallback;
      break;
    case Termination::None:
      break;
  }
}

void IterationCounters::merge(const IterationCounters& o) {
  steps += o.steps;
  fixed_point += o.fixed_point;
  criterion += o.criterion;
  fallback += o.fallback;
  total_iterations += o.total_iterations;
  max_iterations_seen = std::max(max_iterations_seen, o.max_iterations_seen);
}

double IterationCounters::fixed_point_percentage() const {
  return steps == 0 ? 0.0 : 100.0 * static_cast<double>(fixed_point) / static_cast<double>(steps);
}

double IterationCounters::mean_iterations() const {
  return steps == 0 ? 0.0 : static_cast<double>(total_iterations) / static_cast<double>(steps);
}

void sweep(const MachineTableau& t, const CompensatedVector& state, StageSet& stages, const ODESystem& sys,
           std::span<double> delta) {
  const std::size_t s = t.s;
  const std::size_t d = state.size();
  for (std::size_t i = 0; i < s; ++i) {
    auto fi = stages.stage(stages.f, i);
    sys.rhs(stages.stage(stages.Y, i), fi);
    auto li = stages.stage(stages.L, i);
    const double hb = t.hb[i];
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(fi[j])) {
        throw RhsFailure("right-hand side returned a non-finite value at stage " + std::to_string(i + 1), i);
      }
      li[j] = hb * fi[j];
    }
  }
  for (std::size_t i = 0; i < s; ++i) {
    auto yi = stages.stage(stages.Y, i);
    for (std::size_t j = 0; j < d; ++j) {
      double z = state.residual[j];
      for (std::size_t m = 0; m < s; ++m) z = z + t.mu(i, m) * stages.L[m * d + j];
      const double y_new = state.main[j] + z;
      delta[i * d + j] = y_new - yi[j];
      yi[j] = y_new;
    }
  }
  ++stages.k;
}

FallbackVerdict fallback_check(std::span<const double> delta, std::span<const double> Y, double abs_tol,
                               double rel_tol) {
  for (std::size_t j = 0; j < delta.size(); ++j) {
    if (!(std::fabs(delta[j]) <= abs_tol + rel_tol * std::fabs(Y[j]))) return FallbackVerdict::Diverged;
  }
  return FallbackVerdict::Accepted;
}

namespace {

// delta_n = e_n + sum_i (hb_i f_i - L_i), summed left to right over i.
void residual_update(const MachineTableau& t, const CompensatedVector& state, const StageSet& stages,
                     std::span<double> delta) {
  const std::size_t d = state.size();
  for (std::size_t j = 0; j < d; ++j) delta[j] = state.residual[j];
  for (std::size_t i = 0; i < t.s; ++i) {
    const double hb = t.hb[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double e = std::fma(hb, stages.f[i * d + j], -stages.L[i * d + j]);
      delta[j] = delta[j] + e;
    }
  }
}

void accumulate_terms(const StageSet& stages, int reduce_bits, std::vector<double>& terms) {
  terms.assign(stages.L.begin(), stages.L.end());
  if (reduce_bits > 0) {
    for (double& x : terms) x = round_reduced(x, reduce_bits);
  }
}

double max_abs(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

StepResult finalize_step(const MachineTableau& t, const CompensatedVector& state, const StageSet& stages,
                         int reduce_bits) {
  StepResult r;
  r.iterations = stages.k;
  r.delta_residual.resize(state.size());
  residual_update(t, state, stages, r.delta_residual);
  std::vector<double> terms;
  accumulate_terms(stages, reduce_bits, terms);
  r.state = kahan_accumulate(CompensatedVector(state.main, r.delta_residual), std::span<const double>(terms));
  return r;
}

Stepper::Stepper(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg, int reduce_bits)
    : sys_(sys),
      t_(t),
      cfg_(cfg),
      reduce_bits_(reduce_bits),
      stages_(t.s, sys.dimension),
      tracker_(t.s * sys.dimension),
      delta_(t.s * sys.dimension),
      terms_(t.s * sys.dimension),
      delta_n_(sys.dimension) {
  if (t.hb.size() != t.s) throw InvalidArgument("tableau has no step weights; call precompute_hb first");
  if (t.h != cfg.h) throw InvalidArgument("tableau step weights were computed for a different h");
  if (!sys.rhs) throw InvalidArgument(sys.label + " has no right-hand side");
}

StepOutcome Stepper::step(CompensatedVector& state, std::int64_t step_index, std::span<const double> warm_start) {
  const std::size_t s = t_.s;
  const std::size_t d = state.size();
  if (!warm_start.empty()) {
    std::copy(warm_start.begin(), warm_start.end(), stages_.Y.begin());
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      const double y0 = state.main[j] + state.residual[j];
      for (std::size_t i = 0; i < s; ++i) stages_.Y[i * d + j] = y0;
    }
  }
  stages_.k = 0;
  tracker_.reset(s * d);

  StopDecision decision = StopDecision::Continue;
  while (decision == StopDecision::Continue && stages_.k < cfg_.max_iterations) {
    sweep(t_, state, stages_, sys_, delta_);
    decision = cfg_.stop_rule == StopRule::Componentwise
                   ? update_stop<double>(tracker_, delta_, cfg_.streak_required)
                   : update_stop_norm<double>(tracker_, delta_);
  }

  StepOutcome out;
  out.iterations = stages_.k;
  if (decision == StopDecision::FixedPoint) {
    out.termination = Termination::FixedPoint;
  } else {
    if (fallback_check(delta_, stages_.Y, cfg_.fallback_abs_tol, cfg_.fallback_rel_tol) == FallbackVerdict::Diverged) {
      const double norm = max_abs(delta_);
      throw DivergenceError("fixed-point iteration failed to converge at step " + std::to_string(step_index) +
                                " (max |Delta| = " + std::to_string(norm) + "); step size too large",
                            step_index, norm);
    }
    out.termination = decision == StopDecision::Criterion ? Termination::Criterion : Termination::FallbackAccepted;
  }

  residual_update(t_, state, stages_, delta_n_);
  std::copy(delta_n_.begin(), delta_n_.end(), state.residual.begin());
  accumulate_terms(stages_, reduce_bits_, terms_);
  for (std::size_t i = 0; i < s; ++i) {
    kahan_add(state.main, state.residual, std::span<const double>(terms_.data() + i * d, d));
  }
  return out;
}

namespace {

Sample make_sample(const ODESystem& sys, const CompensatedVector& y, std::int64_t step, double h, StepOutcome o) {
  Sample smp;
  smp.step = step;
  smp.time = static_cast<double>(step) * h;
  smp.main = y.main;
  smp.residual = y.residual;
  smp.energy = sys.energy ? energy_of(sys, y) : static_cast<Quad>(std::numeric_limits<double>::quiet_NaN());
  smp.iterations = o.iterations;
  smp.termination = o.termination;
  return smp;
}

void check_inputs(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg,
                  const CompensatedVector& y0) {
  ensure_round_to_nearest();
  cfg.validate();
  if (y0.size() != sys.dimension || y0.residual.size() != sys.dimension) {
    throw InvalidArgument("initial state has length " + std::to_string(y0.size()) + ", system dimension is " +
                          std::to_string(sys.dimension));
  }
  for (std::size_t j = 0; j < y0.size(); ++j) {
    if (!std::isfinite(y0.main[j]) || !std::isfinite(y0.residual[j])) {
      throw InvalidArgument("initial state is not finite");
    }
  }
  if (t.hb.size() != t.s || t.h != cfg.h) throw InvalidArgument("tableau step weights do not match h");
}

Trajectory run(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg,
               const CompensatedVector& y0, int reduce_bits) {
  Trajectory traj;
  traj.label = sys.label;
  traj.h = cfg.h;
  traj.sample_every = cfg.sample_every;
  traj.samples.reserve(static_cast<std::size_t>(cfg.n_steps / cfg.sample_every) + 1);
  CompensatedVector y = y0;
  traj.samples.push_back(make_sample(sys, y, 0, cfg.h, {}));
  Stepper stepper(sys, t, cfg, reduce_bits);
  for (std::int64_t n = 1; n <= cfg.n_steps; ++n) {
    const StepOutcome o = stepper.step(y, n - 1);
    traj.counters.record(o.iterations, o.termination);
    if (n % cfg.sample_every == 0) traj.samples.push_back(make_sample(sys, y, n, cfg.h, o));
  }
  return traj;
}

EstimateSample make_estimate(const Sample& a, const Sample& b, std::size_t position_dims) {
  EstimateSample e;
  e.step = a.step;
  e.time = a.time;
  e.estimate.resize(a.main.size());
  Quad norm2 = 0;
  for (std::size_t j = 0; j < a.main.size(); ++j) {
    const Quad diff = (static_cast<Quad>(a.main[j]) + a.residual[j]) - (static_cast<Quad>(b.main[j]) + b.residual[j]);
    e.estimate[j] = static_cast<double>(diff);
    if (j < position_dims) norm2 += diff * diff;
  }
  e.position_norm = static_cast<double>(xp::sqrt(norm2));
  return e;
}

}  // namespace

Trajectory integrate(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg,
                     const CompensatedVector& y0) {
  check_inputs(sys, t, cfg, y0);
  return run(sys, t, cfg, y0, 0);
}

EstimateResult integrate_with_estimate(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg,
                                       const CompensatedVector& y0) {
  check_inputs(sys, t, cfg, y0);
  if (cfg.estimator_mode == EstimatorMode::Off) {
    throw ConfigError("estimator.mode", "error estimation requires estimator mode parallel or sequential");
  }
  if (cfg.estimator_r < 1) throw ConfigError("estimator.r", "must be >= 1 (r = 0 reproduces the primary solution)");

  EstimateResult res;
  if (cfg.estimator_mode == EstimatorMode::Parallel) {
    auto secondary = std::async(std::launch::async, [&] { return run(sys, t, cfg, y0, cfg.estimator_r); });
    res.trajectory = run(sys, t, cfg, y0, 0);
    res.secondary = secondary.get();
  } else {
    Trajectory& prim = res.trajectory;
    Trajectory& sec = res.secondary;
    for (Trajectory* tr : {&prim, &sec}) {
      tr->label = sys.label;
      tr->h = cfg.h;
      tr->sample_every = cfg.sample_every;
    }
    CompensatedVector y = y0;
    CompensatedVector yh = y0;
    prim.samples.push_back(make_sample(sys, y, 0, cfg.h, {}));
    sec.samples.push_back(make_sample(sys, yh, 0, cfg.h, {}));
    Stepper primary(sys, t, cfg, 0);
    Stepper secondary(sys, t, cfg, cfg.estimator_r);
    for (std::int64_t n = 1; n <= cfg.n_steps; ++n) {
      const StepOutcome o = primary.step(y, n - 1);
      const StepOutcome oh = secondary.step(yh, n - 1, primary.stages().Y);
      prim.counters.record(o.iterations, o.termination);
      sec.counters.record(oh.iterations, oh.termination);
      if (n % cfg.sample_every == 0) {
        prim.samples.push_back(make_sample(sys, y, n, cfg.h, o));
        sec.samples.push_back(make_sample(sys, yh, n, cfg.h, oh));
      }
    }
  }

  res.estimate.r = cfg.estimator_r;
  res.estimate.mode = cfg.estimator_mode;
  res.estimate.secondary = res.secondary.counters;
  for (std::size_t k = 0; k < res.trajectory.samples.size(); ++k) {
    res.estimate.samples.push_back(make_estimate(res.trajectory.samples[k], res.secondary.samples[k], sys.position_dims));
  }
  return res;
}

}  // namespace symirk
