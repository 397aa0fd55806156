#pragma once

// Fixed-point implementation of symplectic IRK (Gauss) steps in binary64.
//
// One step from the compensated state (y~, e):
//
//   Y_i^[0] = fl(y~ + e)
//   repeat k = 1, 2, ...                                          (sweep)
//     f_i = f~(Y_i^[k-1]);  L_i = fl(hb_i f_i)
//     Z_i = (...((e + mu_i1 L_1) + mu_i2 L_2) + ...) + mu_is L_s
//     Y_i^[k] = fl(y~ + Z_i);  Delta = Y^[k] - Y^[k-1]
//   until update_stop() says stop                              
//   E_i = hb_i f_i - L_i (exact, via FMA);  delta = e + sum_i E_i
//   (y~', e') = Kahan accumulation of L_1..L_s onto (y~, delta)
//
// The iteration stops at an exact fixed point (Delta = 0) or once every
// component has stopped improving on its best nonzero |Delta_j| for
// `streak_required` consecutive sweeps.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "symirk/coefficients.hpp"
#include "symirk/compensated.hpp"
#include "symirk/problems.hpp"
#include "symirk/xprec.hpp"

namespace symirk {

enum class Termination { None, FixedPoint, Criterion, FallbackAccepted };
enum class StopDecision { Continue, FixedPoint, Criterion };
enum class FallbackVerdict { Accepted, Diverged };
enum class EstimatorMode { Off, Parallel, Sequential };

// Componentwise is the production rule. NormMonotone stops as soon as
// ||Delta^[k]||_inf >= ||Delta^[k-1]||_inf; it exists only so regression tests
// can contrast the two.
enum class StopRule { Componentwise, NormMonotone };

std::string to_string(Termination t);
std::string to_string(EstimatorMode m);
EstimatorMode parse_estimator_mode(const std::string& s);

struct StageSet {
  std::size_t stages = 0;
  std::size_t dim = 0;
  // Stage-major storage: entry (i, j) lives at i * dim + j.
  std::vector<double> Y;
  std::vector<double> L;
  std::vector<double> f;
  int k = 0;

  StageSet() = default;
  StageSet(std::size_t s, std::size_t d) : stages(s), dim(d), Y(s * d), L(s * d), f(s * d) {}

  std::span<double> stage(std::vector<double>& v, std::size_t i) { return {v.data() + i * dim, dim}; }
  std::span<const double> stage(const std::vector<double>& v, std::size_t i) const { return {v.data() + i * dim, dim}; }
};

template <class T>
struct BasicStopTracker {
  std::vector<T> min_nonzero;
  int satisfied_streak = 0;
  int history_len = 0;
  T previous_norm{};  // used by StopRule::NormMonotone only

  explicit BasicStopTracker(std::size_t n = 0) { reset(n); }
  void reset(std::size_t n) {
    min_nonzero.assign(n, static_cast<T>(std::numeric_limits<double>::infinity()));
    satisfied_streak = 0;
    history_len = 0;
    previous_norm = T{};
  }
};
using StopTracker = BasicStopTracker<double>;

namespace detail {
inline bool is_infinite(double v) { return std::isinf(v); }
inline bool is_infinite(Quad v) { return !xp::isfinite(v) && v == v; }
inline bool is_infinite(const MpReal& v) { return mpfr_inf_p(v.get()) != 0; }
}  // namespace detail

// Per component j the condition is
//   Delta_j = 0  or  no nonzero |Delta_j| seen yet  or  min_nonzero_j <= |Delta_j|.
// A zero component is at its fixed point; an empty history has no witness of
// possible improvement. Both count as satisfied.
template <class T>
StopDecision update_stop(BasicStopTracker<T>& tracker, std::span<const T> delta, int streak_required) {
  const T zero = static_cast<T>(0.0);
  bool all_zero = true;
  bool holds = true;
  for (std::size_t j = 0; j < delta.size(); ++j) {
    const T mag = xp::abs(delta[j]);
    if (mag == zero) continue;
    all_zero = false;
    const T& best = tracker.min_nonzero[j];
    if (!(detail::is_infinite(best) || best <= mag)) holds = false;
  }
  ++tracker.history_len;
  if (all_zero) return StopDecision::FixedPoint;
  tracker.satisfied_streak = holds ? tracker.satisfied_streak + 1 : 0;
  for (std::size_t j = 0; j < delta.size(); ++j) {
    const T mag = xp::abs(delta[j]);
    if (mag != zero && mag < tracker.min_nonzero[j]) tracker.min_nonzero[j] = mag;
  }
  return tracker.satisfied_streak >= streak_required ? StopDecision::Criterion : StopDecision::Continue;
}

// Legacy norm rule; see StopRule::NormMonotone.
template <class T>
StopDecision update_stop_norm(BasicStopTracker<T>& tracker, std::span<const T> delta) {
  const T zero = static_cast<T>(0.0);
  T norm = zero;
  for (const T& d : delta) {
    const T mag = xp::abs(d);
    if (norm < mag) norm = mag;
  }
  ++tracker.history_len;
  if (norm == zero) return StopDecision::FixedPoint;
  const bool stop = tracker.history_len > 1 && norm >= tracker.previous_norm;
  tracker.previous_norm = norm;
  return stop ? StopDecision::Criterion : StopDecision::Continue;
}

struct IntegrationConfig {
  double h = 0.0;
  std::int64_t n_steps = 0;
  std::int64_t sample_every = 1;
  int max_iterations = 100;
  double fallback_abs_tol = 1e-8;
  double fallback_rel_tol = 1e-8;
  int streak_required = 2;
  int estimator_r = 3;
  EstimatorMode estimator_mode = EstimatorMode::Off;
  StopRule stop_rule = StopRule::Componentwise;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

struct IterationCounters {
  std::int64_t steps = 0;
  std::int64_t fixed_point = 0;
  std::int64_t criterion = 0;
  std::int64_t fallback = 0;
  std::int64_t total_iterations = 0;
  int max_iterations_seen = 0;

  void record(int iterations, Termination t);
  void merge(const IterationCounters& other);
  double fixed_point_percentage() const;
  double mean_iterations() const;
};

struct Sample {
  std::int64_t step = 0;
  double time = 0.0;
  std::vector<double> main;
  std::vector<double> residual;
  Quad energy = 0;  // H(main + residual), extended precision
  int iterations = 0;
  Termination termination = Termination::None;
};

struct Trajectory {
  std::string label;
  double h = 0.0;
  std::int64_t sample_every = 1;
  std::vector<Sample> samples;
  IterationCounters counters;
};

struct StepResult {
  CompensatedVector state;
  int iterations = 0;
  Termination termination = Termination::None;
  std::vector<double> delta_residual;  // delta_n = e_n + sum_i E_i
};

// One fixed-point sweep. Writes Y^[k] into stages.Y and Y^[k] - Y^[k-1] into
// delta (length s * D). Throws RhsFailure when f~ returns a non-finite value.
void sweep(const MachineTableau& t, const CompensatedVector& state, StageSet& stages, const ODESystem& sys,
           std::span<double> delta);

FallbackVerdict fallback_check(std::span<const double> delta, std::span<const double> Y, double abs_tol,
                               double rel_tol);

// Compensated finalization from the last sweep's f and L. With reduce_bits r > 0
// the accumulated slopes are fl_{p-r}(L_i) instead of L_i (secondary solution).
StepResult finalize_step(const MachineTableau& t, const CompensatedVector& state, const StageSet& stages,
                         int reduce_bits = 0);

struct StepOutcome {
  int iterations = 0;
  Termination termination = Termination::None;
};

// Reusable single-step driver holding the per-step scratch buffers.
class Stepper {
 public:
  Stepper(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg, int reduce_bits = 0);

  // Advances `state` in place. When warm_start (length s * D) is given the
  // stages start from it, otherwise from fl(main + residual).
  StepOutcome step(CompensatedVector& state, std::int64_t step_index, std::span<const double> warm_start = {});

  const StageSet& stages() const noexcept { return stages_; }

 private:
  const ODESystem& sys_;
  const MachineTableau& t_;
  const IntegrationConfig& cfg_;
  int reduce_bits_;
  StageSet stages_;
  StopTracker tracker_;
  std::vector<double> delta_;
  std::vector<double> terms_;
  std::vector<double> delta_n_;
};

Trajectory integrate(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg,
                     const CompensatedVector& y0);

struct EstimateSample {
  std::int64_t step = 0;
  double time = 0.0;
  std::vector<double> estimate;  // (y~ + e) - (y^ + e^), rounded from extended precision
  double position_norm = 0.0;    // Euclidean norm over the position components
};

struct ErrorEstimateSeries {
  int r = 0;
  EstimatorMode mode = EstimatorMode::Off;
  std::vector<EstimateSample> samples;
  IterationCounters secondary;
};

struct EstimateResult {
  Trajectory trajectory;
  Trajectory secondary;
  ErrorEstimateSeries estimate;
};

EstimateResult integrate_with_estimate(const ODESystem& sys, const MachineTableau& t, const IntegrationConfig& cfg,
                                       const CompensatedVector& y0);

}  // namespace symirk
