// Acceptance suite: one PASS/FAIL line per criterion.
//
//   symirk_acceptance            run everything
//   symirk_acceptance 3 9 10     run a subset

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "symirk/coefficients.hpp"
#include "symirk/compensated.hpp"
#include "symirk/irk.hpp"
#include "symirk/oracle.hpp"
#include "symirk/problems.hpp"
#include "symirk/stats.hpp"

using namespace symirk;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr double kNcdpH = 0x1p-7;

const GaussTableau& gauss6() {
  static const GaussTableau g = generate_gauss(6);
  return g;
}

MachineTableau method6(double h) {
  MachineTableau t = make_machine_tableau(gauss6());
  t.hb = precompute_hb(t, gauss6(), h);
  t.h = h;
  return t;
}

IntegrationConfig config(double h, std::int64_t steps, std::int64_t every) {
  IntegrationConfig c;
  c.h = h;
  c.n_steps = steps;
  c.sample_every = every;
  return c;
}

std::vector<Quad> state_quad(const Sample& s) {
  std::vector<Quad> q(s.main.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = static_cast<Quad>(s.main[j]) + s.residual[j];
  return q;
}

std::vector<double> sample_times(const Trajectory& t) {
  std::vector<double> out;
  for (const Sample& s : t.samples) out.push_back(s.time);
  return out;
}

std::vector<double> energy_error(const Trajectory& t) {
  std::vector<double> out;
  for (Quad v : relative_energy_error(t)) out.push_back(static_cast<double>(v));
  return out;
}

// 1. Bitwise symplecticity of the machine coefficients.
Outcome bitwise_symplecticity() {
  int pairs = 0;
  for (std::size_t s = 1; s <= 8; ++s) {
    const MachineTableau t = make_machine_tableau(generate_gauss(s));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = i; j < s; ++j) {
        const double a = t.mu(i, j);
        const double b = t.mu(j, i);
        const double sum = a + b;
        const double bb = sum - a;
        const double err = (a - (sum - bb)) + (b - bb);
        if (sum != 1.0 || err != 0.0) {
          return {false, fmt("s=%zu pair (%zu,%zu): sum=%a err=%a", s, i + 1, j + 1, sum, err)};
        }
        ++pairs;
      }
    }
  }
  return {true, fmt("%d pairs over s=1..8, all exact", pairs)};
}

// 2. Order 12 on NCDP against the A-configuration reference at h/4.
Outcome order_twelve() {
  const Problem p = load_named_problem("ncdp");
  const double hs[] = {0x1p-2, 0x1p-3, 0x1p-4};
  std::vector<double> errs;
  for (double h : hs) {
    const auto steps = static_cast<std::int64_t>(std::llround(1.0 / h));
    const Trajectory dp = integrate(p.system, method6(h), config(h, steps, steps), p.y0);
    const double hr = h / 4;
    const Trajectory ref = oracle_integrate(p.system, gauss6(), method6(hr), OracleConfig::preset("A"),
                                           config(hr, 4 * steps, 4 * steps), p.y0);
    const auto a = state_quad(dp.samples.back());
    const auto b = state_quad(ref.samples.back());
    double e = 0;
    for (std::size_t j = 0; j < a.size(); ++j) e = std::max(e, std::fabs(static_cast<double>(a[j] - b[j])));
    errs.push_back(e);
  }
  std::string detail = fmt("errors %.3e %.3e %.3e", errs[0], errs[1], errs[2]);
  int checked = 0;
  bool ok = true;
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    if (errs[k + 1] <= 1e-13) continue;
    const double ratio = errs[k] / errs[k + 1];
    detail += fmt("; ratio %.4g (2^%.2f)", ratio, std::log2(ratio));
    ++checked;
    if (ratio < 1024.0) ok = false;
  }
  if (checked == 0) {
    ok = false;
    detail += "; no halving above 1e-13";
  }
  return {ok, detail};
}

// 3. Iteration statistics at the published step sizes.
Outcome iteration_statistics() {
  const Problem nc = load_named_problem("ncdp");
  const Trajectory a = integrate(nc.system, method6(kNcdpH), config(kNcdpH, 1 << 17, 1 << 10), nc.y0);
  const Problem os = load_named_problem("oss");
  const double h = 500.0 / 3.0;
  const Trajectory b = integrate(os.system, method6(h), config(h, 1200, 120), os.y0);
  const double pa = a.counters.fixed_point_percentage(), ma = a.counters.mean_iterations();
  const double pb = b.counters.fixed_point_percentage(), mb = b.counters.mean_iterations();
  const bool ok = pa >= 95 && ma >= 7 && ma <= 11 && pb >= 90 && mb >= 12 && mb <= 17;
  return {ok, fmt("NCDP %.2f%% / %.2f, OSS %.2f%% / %.2f", pa, ma, pb, mb)};
}

// 4. Stopping-criterion regression on OSS at h = 1000/3.
Outcome stopping_regression() {
  const Problem os = load_named_problem("oss");
  const double h = 1000.0 / 3.0;
  IntegrationConfig cfg = config(h, 3000, 10);
  const MachineTableau t = method6(h);
  const Trajectory cur = integrate(os.system, t, cfg, os.y0);
  cfg.stop_rule = StopRule::NormMonotone;
  const Trajectory old = integrate(os.system, t, cfg, os.y0);

  const auto times = sample_times(cur);
  const auto ec = energy_error(cur);
  const auto eo = energy_error(old);
  double bound = 0;
  for (double v : ec) bound = std::max(bound, std::fabs(v));
  const LinearFit fc = random_walk_drift(times, ec);
  const LinearFit fo = random_walk_drift(times, eo);
  const bool ok = bound < 1e-12 && std::fabs(fc.slope) <= 3 * fc.slope_stderr &&
                  std::fabs(fo.slope) >= 10 * std::fabs(fc.slope);
  return {ok, fmt("max|dH/H| %.3e; drift %.3e +- %.3e /day; prior rule drift %.3e (x%.1f)", bound, fc.slope,
                  fc.slope_stderr, fo.slope, std::fabs(fo.slope / fc.slope))};
}

// NCDP ensemble shared by criteria 5 and 6.
struct NcdpEnsemble {
  std::vector<Trajectory> runs;
  EnsembleSpec spec;
};

const NcdpEnsemble& ncdp_ensemble() {
  static const NcdpEnsemble e = [] {
    NcdpEnsemble out;
    out.spec.P = 64;
    out.spec.perturb_rel = 1e-6;
    out.spec.seed = 20170101;
    const Problem p = load_named_problem("ncdp");
    const MachineTableau t = method6(kNcdpH);
    const IntegrationConfig cfg = config(kNcdpH, 1 << 17, 1 << 10);
    out.runs = run_ensemble(p.y0, out.spec, [&](const CompensatedVector& y0, int) {
      return integrate(p.system, t, cfg, y0);
    });
    return out;
  }();
  return e;
}

// 5. Brouwer's law exponent.
Outcome brouwer_walk() {
  const auto& e = ncdp_ensemble();
  std::vector<std::vector<double>> errs;
  for (const auto& r : e.runs) errs.push_back(energy_error(r));
  const DriftWalkFit fit = drift_and_walk_fit(errs, sample_times(e.runs.front()));
  if (!fit.alpha) return {false, "exponent undefined"};
  const double a = *fit.alpha;
  return {a >= 0.35 && a <= 0.65, fmt("alpha = %.3f +- %.3f (P=%d, %zu times)", a, fit.alpha_stderr, e.spec.P,
                                      fit.times.size())};
}

// 6. Energy-jump normality.
Outcome jump_normality() {
  const auto& e = ncdp_ensemble();
  std::vector<double> jumps;
  for (std::size_t r = 0; r < e.runs.size(); ++r) {
    for (const JumpSample& j : energy_jumps(e.runs[r], static_cast<int>(r))) jumps.push_back(static_cast<double>(j.value));
  }
  const Histogram h = energy_jump_histogram(jumps, 40);
  const Moments m = moments(jumps);
  const double mean_bound = 3 * m.sd / std::sqrt(static_cast<double>(jumps.size()));
  const bool ok = std::fabs(m.skewness) < 0.5 && std::fabs(m.excess_kurtosis) < 1.0 && std::fabs(m.mean) <= mean_bound;
  return {ok, fmt("n=%zu mu=%.3e sigma=%.3e skew=%.3f exkurt=%.3f |mu| bound %.3e (histogram total %lld)", m.n,
                  m.mean, m.sd, m.skewness, m.excess_kurtosis, mean_bound, static_cast<long long>(h.total))};
}

// 7. Angular momentum on OSS.
Outcome angular_momentum() {
  const Problem os = load_named_problem("oss");
  const double h = 500.0 / 3.0;
  const Trajectory t = integrate(os.system, method6(h), config(h, 600, 1), os.y0);
  const auto l0 = oss_angular_momentum(state_quad(t.samples.front()), 6);
  const Quad n0 = xp::sqrt(l0[0] * l0[0] + l0[1] * l0[1] + l0[2] * l0[2]);
  double worst = 0;
  for (const Sample& s : t.samples) {
    const auto l = oss_angular_momentum(state_quad(s), 6);
    Quad d2 = 0;
    for (int c = 0; c < 3; ++c) d2 += (l[c] - l0[c]) * (l[c] - l0[c]);
    worst = std::max(worst, static_cast<double>(xp::sqrt(d2) / n0));
  }
  return {worst < 1e-12, fmt("max relative |L - L0| = %.3e over %zu samples", worst, t.samples.size())};
}

// 8. Estimator fidelity.
Outcome estimator_fidelity() {
  const Problem p = load_named_problem("ncdp");
  const MachineTableau t = method6(kNcdpH);
  IntegrationConfig cfg = config(kNcdpH, 1 << 17, 1 << 10);
  cfg.estimator_r = 3;
  cfg.estimator_mode = EstimatorMode::Sequential;
  const EstimateResult seq = integrate_with_estimate(p.system, t, cfg, p.y0);
  cfg.estimator_mode = EstimatorMode::Parallel;
  const EstimateResult par = integrate_with_estimate(p.system, t, cfg, p.y0);
  const Trajectory ref = oracle_integrate(p.system, gauss6(), t, OracleConfig::preset("A"), cfg, p.y0);
  const ErrorSeries truth = true_roundoff_error(seq.trajectory, ref, p.system.position_dims);

  std::size_t agree = 0, total = 0;
  for (std::size_t k = 11; k < truth.points.size(); ++k) {
    const double est = seq.estimate.samples[k].position_norm;
    const double tru = truth.points[k].position_norm;
    ++total;
    if (est > 0 && tru > 0 && est <= 10 * tru && tru <= 10 * est) ++agree;
  }
  const double frac = total ? static_cast<double>(agree) / static_cast<double>(total) : 0.0;
  const double ms = seq.secondary.counters.mean_iterations();
  const double mp = par.secondary.counters.mean_iterations();
  const bool same = seq.trajectory.samples.back().main == par.trajectory.samples.back().main;
  const bool ok = frac >= 0.8 && ms < mp && same;
  return {ok, fmt("%zu/%zu samples within x10 (%.1f%%); final est %.3e true %.3e; secondary mean iterations "
                  "sequential %.3f parallel %.3f",
                  agree, total, 100 * frac, seq.estimate.samples.back().position_norm,
                  truth.points.back().position_norm, ms, mp)};
}

// A double as an exact integer multiple of 2^emin.
mpz_class scaled(double x, int emin) {
  int e = 0;
  const double m = std::frexp(x, &e);
  mpz_class z;
  mpz_set_d(z.get_mpz_t(), std::ldexp(m, 53));
  const int shift = e - 53 - emin;
  if (shift >= 0) return z << shift;
  if (mpz_scan1(z.get_mpz_t(), 0) < static_cast<mp_bitcnt_t>(-shift)) {
    throw std::logic_error("value is not a multiple of the scale");
  }
  return z >> -shift;
}

// 9. Compensated summation against a big-rational oracle. Each component is
// an accumulator start in [1, 2) followed by up to 1000 signed increments of
// log-uniform magnitude in [2e-8, 1e-2], so the magnitudes of a sequence
// span up to 10^8.
Outcome kahan_oracle() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> len_d(1, 1000);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = std::log10(5e5);
  constexpr std::size_t dim = 3;
  constexpr int emin = -200;
  const double u = 0x1p-53;
  auto sign = [&] { return rng() & 1 ? -1.0 : 1.0; };
  int bound_fail = 0, wide = 0, naive_worse = 0, streams = 0;
  double worst_ratio = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    const int n = len_d(rng);
    std::vector<double> start(dim);
    for (double& v : start) v = sign() * std::pow(2.0, unit(rng));
    std::vector<std::vector<double>> terms(static_cast<std::size_t>(n), std::vector<double>(dim));
    for (auto& t : terms) {
      for (double& v : t) v = sign() * std::pow(10.0, -2.0 - span * unit(rng));
    }
    std::vector<double> main = start, res(dim, 0.0), naive = start;
    for (const auto& t : terms) {
      kahan_add(main, res, t);
      for (std::size_t j = 0; j < dim; ++j) naive[j] += t[j];
    }
    for (std::size_t j = 0; j < dim; ++j) {
      ++streams;
      mpz_class exact = scaled(start[j], emin);
      double abs_sum = std::fabs(start[j]);
      double lo = abs_sum, hi = abs_sum;
      for (const auto& t : terms) {
        exact += scaled(t[j], emin);
        abs_sum += std::fabs(t[j]);
        lo = std::min(lo, std::fabs(t[j]));
        hi = std::max(hi, std::fabs(t[j]));
      }
      const mpz_class kahan = scaled(main[j], emin) + (res[j] == 0 ? mpz_class(0) : scaled(res[j], emin));
      const mpz_class ek = abs(kahan - exact);
      const mpz_class en = abs(scaled(naive[j], emin) - exact);
      const double ekd = std::ldexp(ek.get_d(), emin);
      if (ekd > 2 * u * abs_sum) ++bound_fail;
      worst_ratio = std::max(worst_ratio, ekd / (u * abs_sum));
      if (hi / lo >= 1e4) {
        ++wide;
        if (en > ek) ++naive_worse;
      }
    }
  }
  const double frac = wide ? static_cast<double>(naive_worse) / wide : 0.0;
  return {bound_fail == 0 && frac >= 0.99,
          fmt("%d sequences: bound violations %d, worst error %.3g u*sum|x|; naive worse on %d/%d with range >= 1e4 "
              "(%.2f%%)",
              streams, bound_fail, worst_ratio, naive_worse, wide, 100 * frac)};
}

// 10. fl_{p-r} bit properties.
Outcome reduced_rounding() {
  std::mt19937_64 rng(10);
  long tested = 0, failures = 0;
  double worst = 0;
  while (tested < 1000000) {
    const double x = std::bit_cast<double>(rng());
    if (!std::isfinite(x) || x == 0) continue;
    int ex = 0;
    std::frexp(x, &ex);
    if (ex < -1000 || ex > 1000) continue;
    const int r = 1 + static_cast<int>(tested % 8);
    // Exponent boundary: fl((2^r + 1) x) leaves the binade of 2^r x, so the
    // rounding happens one bit higher.
    int e_big = 0;
    std::frexp(std::ldexp(x, r) + x, &e_big);
    if (e_big != ex + r) continue;
    const double y = round_reduced(x, r);
    int ey = 0;
    std::frexp(y, &ey);
    if (ey != ex) continue;
    ++tested;
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(y);
    const std::uint64_t mask = (std::uint64_t{1} << r) - 1;
    const double ulp_x = std::ldexp(1.0, ex - 53);
    const double dev = std::fabs(y - x) / ulp_x;
    worst = std::max(worst, dev / std::ldexp(1.0, r - 1));
    if ((bits & mask) != 0 || dev > std::ldexp(1.0, r - 1) || round_reduced(y, r) != y) ++failures;
  }
  return {failures == 0, fmt("%ld values, %ld failures, worst |dx| = %.3f * 2^(r-1) ulp", tested, failures, worst)};
}

// 11. DP against the FPIEA emulation.
Outcome near_optimality() {
  EnsembleSpec spec;
  spec.P = 32;
  spec.perturb_rel = 1e-6;
  spec.seed = 11;
  const Problem p = load_named_problem("ncdp");
  const MachineTableau t = method6(kNcdpH);
  const IntegrationConfig cfg = config(kNcdpH, 1 << 15, 1 << 8);
  const auto dp = run_ensemble(p.y0, spec, [&](const CompensatedVector& y0, int) {
    return integrate(p.system, t, cfg, y0);
  });
  const auto ref = run_ensemble(p.y0, spec, [&](const CompensatedVector& y0, int) {
    return oracle_integrate(p.system, gauss6(), t, OracleConfig::preset("fpiea"), cfg, y0);
  });
  std::vector<double> a, b;
  for (const auto& r : dp) a.push_back(energy_error(r).back());
  for (const auto& r : ref) b.push_back(energy_error(r).back());
  const Moments ma = moments(a), mb = moments(b);
  const double rm = ma.mean / mb.mean, rs = ma.sd / mb.sd;
  const bool ok = rm >= 0.5 && rm <= 2 && rs >= 0.5 && rs <= 2;
  const double se = std::sqrt(static_cast<double>(spec.P));
  return {ok, fmt("final dH/H mean DP %.3e +- %.1e, FPIEA %.3e +- %.1e (x%.2f); sigma DP %.3e FPIEA %.3e (x%.2f)",
                  ma.mean, ma.sd / se, mb.mean, mb.sd / se, rm, ma.sd, mb.sd, rs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"bitwise symplectic coefficients", bitwise_symplecticity}},
      {2, {"order 12 convergence", order_twelve}},
      {3, {"fixed-point statistics", iteration_statistics}},
      {4, {"stopping criterion removes drift", stopping_regression}},
      {5, {"random-walk exponent", brouwer_walk}},
      {6, {"energy-jump normality", jump_normality}},
      {7, {"angular momentum conservation", angular_momentum}},
      {8, {"error estimator fidelity", estimator_fidelity}},
      {9, {"compensated summation oracle", kahan_oracle}},
      {10, {"reduced-precision rounding", reduced_rounding}},
      {11, {"near-optimal round-off", near_optimality}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [k, v] : criteria) selected.push_back(k);
  }
  int failed = 0;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::printf("criterion %d: unknown\n", k);
      ++failed;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-34s %s  [%.1fs] %s\n", k, it->second.first, o.pass ? "PASS" : "FAIL", sec,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
