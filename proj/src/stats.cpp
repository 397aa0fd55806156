#include "symirk/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "symirk/errors.hpp"

namespace symirk {
namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double normal_cdf(double x, double mean, double sd) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); }

}  // namespace

void EnsembleSpec::validate() const {
  if (P < 2) throw ConfigError("ensemble.P", "must be >= 2");
  if (!(perturb_rel > 0.0) || !std::isfinite(perturb_rel)) throw ConfigError("ensemble.perturb_rel", "must be > 0");
}

double uniform_pm1(std::mt19937_64& rng) {
  const std::uint64_t x = rng() >> 11;
  return std::ldexp(static_cast<double>(x), -52) - 1.0;
}

CompensatedVector perturb(const CompensatedVector& y0, double rel, std::mt19937_64& rng) {
  CompensatedVector out(std::vector<double>(y0.size(), 0.0));
  for (std::size_t j = 0; j < y0.size(); ++j) {
    if (!std::isfinite(y0.main[j])) throw InvalidArgument("cannot perturb a non-finite state");
    const Quad factor = Quad(1) + static_cast<Quad>(rel) * uniform_pm1(rng);
    out.main[j] = static_cast<double>(static_cast<Quad>(y0.main[j]) * factor);
  }
  return out;
}

std::vector<CompensatedVector> ensemble_initial_states(const CompensatedVector& y0, const EnsembleSpec& spec) {
  spec.validate();
  std::vector<CompensatedVector> out;
  out.reserve(static_cast<std::size_t>(spec.P));
  for (int i = 0; i < spec.P; ++i) {
    std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(i));
    out.push_back(perturb(y0, spec.perturb_rel, rng));
  }
  return out;
}

std::vector<Trajectory> run_ensemble(const CompensatedVector& y0, const EnsembleSpec& spec,
                                     const EnsembleRunner& runner, unsigned threads) {
  const auto starts = ensemble_initial_states(y0, spec);
  std::vector<Trajectory> out(starts.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(starts.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        out[i] = runner(starts[i], static_cast<int>(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = starts.size();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<JumpSample> energy_jumps(const Trajectory& traj, int run) {
  std::vector<JumpSample> out;
  if (traj.samples.size() < 2) return out;
  const Quad h0 = traj.samples.front().energy;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    out.push_back({run, static_cast<std::int64_t>(k), (traj.samples[k].energy - traj.samples[k - 1].energy) / h0});
  }
  return out;
}

std::vector<Quad> relative_energy_error(const Trajectory& traj) {
  std::vector<Quad> out;
  if (traj.samples.empty()) return out;
  const Quad h0 = traj.samples.front().energy;
  out.reserve(traj.samples.size());
  for (const Sample& s : traj.samples) out.push_back((s.energy - h0) / h0);
  return out;
}

Moments moments(std::span<const double> samples) {
  Moments m;
  m.n = samples.size();
  if (m.n == 0) return m;
  Quad sum = 0;
  for (double v : samples) sum += v;
  const Quad mean = sum / static_cast<Quad>(m.n);
  Quad m2 = 0, m3 = 0, m4 = 0;
  for (double v : samples) {
    const Quad d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const Quad n = static_cast<Quad>(m.n);
  m.mean = static_cast<double>(mean);
  m.sd = m.n > 1 ? std::sqrt(static_cast<double>(m2 / (n - 1))) : 0.0;
  if (m2 > 0) {
    const Quad v = m2 / n;
    m.skewness = static_cast<double>((m3 / n) / (v * xp::sqrt(v)));
    m.excess_kurtosis = static_cast<double>((m4 / n) / (v * v)) - 3.0;
  }
  return m;
}

Histogram energy_jump_histogram(std::span<const double> samples, std::size_t bins) {
  if (samples.size() < 100) {
    throw InvalidArgument("histogram needs at least 100 samples, got " + std::to_string(samples.size()));
  }
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  const Moments m = moments(samples);
  Histogram h;
  h.mean = m.mean;
  h.sd = m.sd;
  h.total = static_cast<std::int64_t>(samples.size());
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  h.counts.assign(bins, 0);
  h.expected.assign(bins, 0.0);
  h.edges.resize(bins + 1);
  if (lo == hi) {
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo;
    h.counts[0] = h.total;
    h.expected[0] = static_cast<double>(h.total);
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges[bins] = hi;
  for (double v : samples) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(b, bins - 1)]++;
  }
  if (h.sd > 0) {
    for (std::size_t b = 0; b < bins; ++b) {
      h.expected[b] = static_cast<double>(h.total) *
                      (normal_cdf(h.edges[b + 1], h.mean, h.sd) - normal_cdf(h.edges[b], h.mean, h.sd));
    }
  }
  return h;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least squares needs two or more matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw InvalidArgument("least squares with constant abscissa");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      rss += r * r;
    }
    f.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  }
  return f;
}

DriftWalkFit drift_and_walk_fit(const std::vector<std::vector<double>>& errors, std::span<const double> times) {
  if (errors.size() < 16) throw InvalidArgument("drift fit needs at least 16 runs");
  if (times.size() < 8) throw InvalidArgument("drift fit needs at least 8 sample times");
  for (const auto& run : errors) {
    if (run.size() != times.size()) throw InvalidArgument("run length does not match the sample times");
  }
  DriftWalkFit fit;
  fit.times.assign(times.begin(), times.end());
  fit.mean.resize(times.size());
  fit.sd.resize(times.size());
  std::vector<double> column(errors.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t r = 0; r < errors.size(); ++r) column[r] = errors[r][k];
    const Moments m = moments(column);
    fit.mean[k] = m.mean;
    fit.sd[k] = m.sd;
  }
  fit.drift = least_squares(times, fit.mean);

  std::vector<double> lt, ls;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] > 0 && fit.sd[k] > 0) {
      lt.push_back(std::log(times[k]));
      ls.push_back(std::log(fit.sd[k]));
    }
  }
  if (lt.size() >= 2 && lt.front() != lt.back()) {
    const LinearFit pl = least_squares(lt, ls);
    fit.alpha = pl.slope;
    fit.alpha_stderr = pl.slope_stderr;
  }
  return fit;
}

LinearFit random_walk_drift(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size() || times.size() < 3) {
    throw InvalidArgument("random-walk drift needs three or more matching points");
  }
  const std::size_t K = times.size() - 1;
  const double dt = (times.back() - times.front()) / static_cast<double>(K);
  if (!(dt > 0)) throw InvalidArgument("random-walk drift needs increasing times");
  std::vector<double> inc(K);
  for (std::size_t k = 0; k < K; ++k) inc[k] = values[k + 1] - values[k];
  const Moments m = moments(inc);
  LinearFit f;
  f.slope = m.mean / dt;
  f.intercept = values.front() - f.slope * times.front();
  f.slope_stderr = m.sd / std::sqrt(static_cast<double>(K)) / dt;
  return f;
}

IterationStats iteration_stats(std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw InvalidArgument("iteration statistics need at least one trajectory");
  IterationStats s;
  for (const Trajectory& t : trajectories) s.counters.merge(t.counters);
  s.fixed_point_percentage = s.counters.fixed_point_percentage();
  s.mean_iterations = s.counters.mean_iterations();
  return s;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_lo,bin_hi,count,normal_expected\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    os << g17(h.edges[b]) << ',' << g17(h.edges[b + 1]) << ',' << h.counts[b] << ',' << g17(h.expected[b]) << '\n';
  }
}

void write_drift_csv(std::ostream& os, const DriftWalkFit& fit) {
  os << "time,mean_rel_energy_error,sd_rel_energy_error\n";
  for (std::size_t k = 0; k < fit.times.size(); ++k) {
    os << g17(fit.times[k]) << ',' << g17(fit.mean[k]) << ',' << g17(fit.sd[k]) << '\n';
  }
}

void write_fit_summary_csv(std::ostream& os, const DriftWalkFit& fit, const Moments& jumps, const EnsembleSpec& spec) {
  os << "quantity,value\n";
  os << "ensemble_size," << spec.P << '\n';
  os << "perturb_rel," << g17(spec.perturb_rel) << '\n';
  os << "perturb_distribution,uniform[-1;1]\n";
  os << "rng,mt19937_64 seed+member\n";
  os << "seed," << spec.seed << '\n';
  os << "drift_slope," << g17(fit.drift.slope) << '\n';
  os << "drift_slope_stderr," << g17(fit.drift.slope_stderr) << '\n';
  os << "walk_exponent," << (fit.alpha ? g17(*fit.alpha) : std::string("undefined")) << '\n';
  os << "walk_exponent_stderr," << g17(fit.alpha_stderr) << '\n';
  os << "jump_count," << jumps.n << '\n';
  os << "jump_mean," << g17(jumps.mean) << '\n';
  os << "jump_sd," << g17(jumps.sd) << '\n';
  os << "jump_skewness," << g17(jumps.skewness) << '\n';
  os << "jump_excess_kurtosis," << g17(jumps.excess_kurtosis) << '\n';
}

void write_iteration_csv(std::ostream& os, const IterationStats& s) {
  os << "steps,fixed_point,criterion,fallback,fixed_point_percentage,mean_iterations,max_iterations\n";
  os << s.counters.steps << ',' << s.counters.fixed_point << ',' << s.counters.criterion << ','
     << s.counters.fallback << ',' << g17(s.fixed_point_percentage) << ',' << g17(s.mean_iterations) << ','
     << s.counters.max_iterations_seen << '\n';
}

}  // namespace symirk
