#include "symirk/oracle.hpp"

#include <cmath>

#include "symirk/errors.hpp"

namespace symirk {

void OracleConfig::validate() const {
  if (bits < 2 * kMachineDigits) throw ConfigError("oracle.bits", "must be >= 106");
  if (exhaustive_streak < 1) throw ConfigError("oracle.streak", "must be >= 1");
}

OracleConfig OracleConfig::preset(const std::string& name, long bits) {
  OracleConfig c;
  c.bits = bits;
  if (name == "A") return c;
  if (name == "B") {
    c.stop_mode = OracleStop::DoubleRoundedCoincidence;
    return c;
  }
  if (name == "C") {
    c.f_variant = Arithmetic::Machine;
    return c;
  }
  if (name == "D") {
    c.coeff_variant = Arithmetic::Machine;
    return c;
  }
  if (name == "fpiea") {
    c.f_variant = Arithmetic::Machine;
    c.coeff_variant = Arithmetic::Machine;
    return c;
  }
  throw ConfigError("oracle.variant", "expected A, B, C, D or fpiea, got '" + name + "'");
}

namespace {

template <class Real>
class OracleRun {
 public:
  OracleRun(const ODESystem& sys, const GaussTableau& g, const MachineTableau& t, const OracleConfig& ocfg,
            const IntegrationConfig& cfg)
      : sys_(sys), ocfg_(ocfg), cfg_(cfg), s_(g.s), d_(sys.dimension) {
    const Real zero = xp::from_double<Real>(0.0);
    mu_.assign(s_ * s_, zero);
    hb_.assign(s_, zero);
    if (ocfg.coeff_variant == Arithmetic::Machine) {
      for (std::size_t k = 0; k < s_ * s_; ++k) mu_[k] = xp::from_double<Real>(t.mu_tilde[k]);
      for (std::size_t i = 0; i < s_; ++i) hb_[i] = xp::from_double<Real>(t.hb[i]);
    } else {
      const Real h = xp::from_double<Real>(cfg.h);
      for (std::size_t i = 0; i < s_; ++i) {
        hb_[i] = h * xp::from_mp<Real>(g.b[i]);
        for (std::size_t j = 0; j < s_; ++j) {
          mu_[i * s_ + j] = xp::from_mp<Real>(g.A(i, j) / g.b[j]);
        }
      }
    }
    y_.assign(d_, zero);
    Y_.assign(s_ * d_, zero);
    Ynew_.assign(s_ * d_, zero);
    L_.assign(s_ * d_, zero);
    delta_.assign(s_ * d_, zero);
    fin_.assign(d_, zero);
    fout_.assign(d_, zero);
    fin64_.assign(d_, 0.0);
    fout64_.assign(d_, 0.0);
  }

  Trajectory run(const CompensatedVector& y0) {
    for (std::size_t j = 0; j < d_; ++j) {
      y_[j] = xp::from_double<Real>(y0.main[j]) + xp::from_double<Real>(y0.residual[j]);
    }
    Trajectory traj;
    traj.label = sys_.label;
    traj.h = cfg_.h;
    traj.sample_every = cfg_.sample_every;
    traj.samples.push_back(sample(0, {}));
    for (std::int64_t n = 1; n <= cfg_.n_steps; ++n) {
      const StepOutcome o = step(n - 1);
      traj.counters.record(o.iterations, o.termination);
      if (n % cfg_.sample_every == 0) traj.samples.push_back(sample(n, o));
    }
    return traj;
  }

 private:
  void evaluate(std::size_t i) {
    const std::size_t off = i * d_;
    if (ocfg_.f_variant == Arithmetic::Machine) {
      for (std::size_t j = 0; j < d_; ++j) fin64_[j] = xp::to_double(Y_[off + j]);
      sys_.rhs(fin64_, fout64_);
      for (std::size_t j = 0; j < d_; ++j) {
        if (!std::isfinite(fout64_[j])) throw RhsFailure("non-finite right-hand side in reference run", i);
        L_[off + j] = hb_[i] * xp::from_double<Real>(fout64_[j]);
      }
    } else {
      for (std::size_t j = 0; j < d_; ++j) fin_[j] = Y_[off + j];
      evaluate_rhs<Real>(sys_, fin_, fout_);
      for (std::size_t j = 0; j < d_; ++j) {
        if (!xp::isfinite(fout_[j])) throw RhsFailure("non-finite right-hand side in reference run", i);
        L_[off + j] = hb_[i] * fout_[j];
      }
    }
  }

  StepOutcome step(std::int64_t step_index) {
    for (std::size_t i = 0; i < s_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) Y_[i * d_ + j] = y_[j];
    }
    BasicStopTracker<Real> tracker(s_ * d_);
    const Real zero = xp::from_double<Real>(0.0);
    StopDecision decision = StopDecision::Continue;
    int k = 0;
    while (decision == StopDecision::Continue && k < cfg_.max_iterations) {
      for (std::size_t i = 0; i < s_; ++i) evaluate(i);
      bool rounded_equal = true;
      for (std::size_t i = 0; i < s_; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
          Real z = zero;
          for (std::size_t m = 0; m < s_; ++m) z += mu_[i * s_ + m] * L_[m * d_ + j];
          Real ynew = y_[j] + z;
          const std::size_t idx = i * d_ + j;
          delta_[idx] = ynew - Y_[idx];
          if (xp::to_double(ynew) != xp::to_double(Y_[idx])) rounded_equal = false;
          Ynew_[idx] = std::move(ynew);
        }
      }
      std::swap(Y_, Ynew_);
      ++k;
      if (ocfg_.stop_mode == OracleStop::DoubleRoundedCoincidence) {
        if (rounded_equal) decision = StopDecision::FixedPoint;
      } else {
        decision = update_stop<Real>(tracker, delta_, ocfg_.exhaustive_streak);
      }
    }

    StepOutcome out;
    out.iterations = k;
    if (decision == StopDecision::FixedPoint) {
      out.termination = Termination::FixedPoint;
    } else {
      double norm = 0;
      bool ok = true;
      for (std::size_t idx = 0; idx < s_ * d_; ++idx) {
        const double dd = std::fabs(xp::to_double(delta_[idx]));
        norm = std::max(norm, dd);
        if (!(dd <= cfg_.fallback_abs_tol + cfg_.fallback_rel_tol * std::fabs(xp::to_double(Y_[idx])))) ok = false;
      }
      if (!ok) {
        throw DivergenceError("reference fixed-point iteration failed to converge at step " +
                                  std::to_string(step_index),
                              step_index, norm);
      }
      out.termination = decision == StopDecision::Criterion ? Termination::Criterion : Termination::FallbackAccepted;
    }
    for (std::size_t j = 0; j < d_; ++j) {
      Real acc = y_[j];
      for (std::size_t i = 0; i < s_; ++i) acc += L_[i * d_ + j];
      y_[j] = std::move(acc);
    }
    return out;
  }

  Sample sample(std::int64_t n, StepOutcome o) const {
    Sample smp;
    smp.step = n;
    smp.time = static_cast<double>(n) * cfg_.h;
    smp.main.resize(d_);
    smp.residual.resize(d_);
    std::vector<Quad> q(d_);
    for (std::size_t j = 0; j < d_; ++j) {
      const auto [hi, lo] = xp::split_double(y_[j]);
      smp.main[j] = hi;
      smp.residual[j] = lo;
      q[j] = xp::to_quad(y_[j]);
    }
    smp.energy = sys_.energy ? sys_.energy(q) : static_cast<Quad>(std::numeric_limits<double>::quiet_NaN());
    smp.iterations = o.iterations;
    smp.termination = o.termination;
    return smp;
  }

  const ODESystem& sys_;
  const OracleConfig& ocfg_;
  const IntegrationConfig& cfg_;
  std::size_t s_;
  std::size_t d_;
  std::vector<Real> mu_;
  std::vector<Real> hb_;
  std::vector<Real> y_;
  std::vector<Real> Y_;
  std::vector<Real> Ynew_;
  std::vector<Real> L_;
  std::vector<Real> delta_;
  std::vector<Real> fin_;
  std::vector<Real> fout_;
  std::vector<double> fin64_;
  std::vector<double> fout64_;
};

}  // namespace

Trajectory oracle_integrate(const ODESystem& sys, const GaussTableau& g, const MachineTableau& t,
                            const OracleConfig& ocfg, const IntegrationConfig& cfg, const CompensatedVector& y0) {
  ocfg.validate();
  cfg.validate();
  if (y0.size() != sys.dimension) throw InvalidArgument("initial state does not match system dimension");
  if (g.s != t.s) throw InvalidArgument("extended and machine tableaus differ in stage count");
  if (ocfg.coeff_variant == Arithmetic::Machine && (t.hb.size() != t.s || t.h != cfg.h)) {
    throw InvalidArgument("machine tableau step weights do not match h");
  }
  if (ocfg.bits == kQuadDigits) {
    MpPrecisionGuard guard(std::max<long>(g.bits, kQuadDigits));
    OracleRun<Quad> run(sys, g, t, ocfg, cfg);
    return run.run(y0);
  }
  MpPrecisionGuard guard(ocfg.bits);
  OracleRun<MpReal> run(sys, g, t, ocfg, cfg);
  return run.run(y0);
}

ErrorSeries true_roundoff_error(const Trajectory& primary, const Trajectory& reference, std::size_t position_dims) {
  if (primary.samples.size() != reference.samples.size()) {
    throw InvalidComparison("trajectories have different numbers of samples");
  }
  ErrorSeries out;
  if (primary.samples.empty()) return out;
  const Quad h0 = primary.samples.front().energy;
  const Quad r0 = reference.samples.front().energy;
  for (std::size_t k = 0; k < primary.samples.size(); ++k) {
    const Sample& a = primary.samples[k];
    const Sample& b = reference.samples[k];
    if (a.step != b.step || a.main.size() != b.main.size()) {
      throw InvalidComparison("trajectories are not sampled on the same grid");
    }
    ErrorPoint p;
    p.step = a.step;
    p.time = a.time;
    p.error.resize(a.main.size());
    Quad norm2 = 0;
    for (std::size_t j = 0; j < a.main.size(); ++j) {
      const Quad diff =
          (static_cast<Quad>(a.main[j]) + a.residual[j]) - (static_cast<Quad>(b.main[j]) + b.residual[j]);
      p.error[j] = static_cast<double>(diff);
      if (j < position_dims) norm2 += diff * diff;
    }
    p.position_norm = static_cast<double>(xp::sqrt(norm2));
    p.rel_energy_error = static_cast<double>((a.energy - h0) / h0);
    p.ref_rel_energy_error = static_cast<double>((b.energy - r0) / r0);
    out.points.push_back(std::move(p));
  }
  return out;
}

}  // namespace symirk
