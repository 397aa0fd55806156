#pragma once

// Ensemble experiments and round-off statistics.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "symirk/compensated.hpp"
#include "symirk/irk.hpp"
#include "symirk/xprec.hpp"

namespace symirk {

struct EnsembleSpec {
  int P = 64;
  double perturb_rel = 1e-6;
  std::uint64_t seed = 1;

  void validate() const;
};

// Generator: std::mt19937_64 (the standard 64-bit Mersenne Twister, fully
// specified by the C++ standard). u = 2 * (x >> 11) * 2^-53 - 1 is uniform on
// [-1, 1) and computed without library distributions, so ensembles are
// portable across standard libraries.
double uniform_pm1(std::mt19937_64& rng);

// y_j' = fl(y_j * (1 + rel * u_j)) on the main part; the residual is reset.
CompensatedVector perturb(const CompensatedVector& y0, double rel, std::mt19937_64& rng);

// Member i of the ensemble uses its own stream seeded with seed + i.
std::vector<CompensatedVector> ensemble_initial_states(const CompensatedVector& y0, const EnsembleSpec& spec);

using EnsembleRunner = std::function<Trajectory(const CompensatedVector& y0, int member)>;

// Runs the members concurrently on `threads` workers (0 = hardware count).
// The result is ordered by member index regardless of scheduling.
std::vector<Trajectory> run_ensemble(const CompensatedVector& y0, const EnsembleSpec& spec,
                                     const EnsembleRunner& runner, unsigned threads = 0);

struct JumpSample {
  int run = 0;
  std::int64_t k = 0;
  Quad value = 0;  // (H(y_km) - H(y_{km-m})) / H(y_0)
};

std::vector<JumpSample> energy_jumps(const Trajectory& traj, int run = 0);

// (H(y_km) - H(y_0)) / H(y_0) for every sample, extended precision.
std::vector<Quad> relative_energy_error(const Trajectory& traj);

struct Histogram {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> edges;        // bins + 1 edges
  std::vector<std::int64_t> counts;
  std::vector<double> expected;     // normal(mean, sd) count per bin
  std::int64_t total = 0;
};

// Equal-width bins over [min, max]. Throws InvalidArgument below 100 samples.
Histogram energy_jump_histogram(std::span<const double> samples, std::size_t bins = 50);

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(std::span<const double> samples);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct DriftWalkFit {
  std::vector<double> times;
  std::vector<double> mean;  // ensemble mean of the relative energy error
  std::vector<double> sd;    // ensemble standard deviation
  LinearFit drift;           // mean vs t
  std::optional<double> alpha;  // slope of log sd vs log t; empty when undefined
  double alpha_stderr = 0.0;
};

// errors[run][k] is the relative energy error of `run` at times[k]. Requires
// at least 8 sample times and 16 runs. Times with zero spread (t = 0 in
// particular) are left out of the power-law fit.
DriftWalkFit drift_and_walk_fit(const std::vector<std::vector<double>>& errors, std::span<const double> times);

// Drift of a single series modelled as a random walk with drift: the slope is
// the mean increment per unit time and its standard error is
// sd(increments) / sqrt(K) per unit time. Ordinary least squares underestimates
// the uncertainty of a random-walk series by a large factor.
LinearFit random_walk_drift(std::span<const double> times, std::span<const double> values);

struct IterationStats {
  double fixed_point_percentage = 0.0;
  double mean_iterations = 0.0;
  IterationCounters counters;
};

IterationStats iteration_stats(std::span<const Trajectory> trajectories);

// CSV output, 17 significant digits.
void write_histogram_csv(std::ostream& os, const Histogram& h);
void write_drift_csv(std::ostream& os, const DriftWalkFit& fit);
void write_fit_summary_csv(std::ostream& os, const DriftWalkFit& fit, const Moments& jumps, const EnsembleSpec& spec);
void write_iteration_csv(std::ostream& os, const IterationStats& s);

}  // namespace symirk
