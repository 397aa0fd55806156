#pragma once

// Extended-precision reference integrator.
//
// Runs the mu-form Gauss scheme with plain fixed-point iteration where every
// operation is carried out at `bits` precision. Individual ingredients can be
// switched back to their binary64 versions to isolate error sources:
//
//   A  everything extended                       -> truncation error
//   B  A, but stop once consecutive stage iterates agree after rounding to
//      binary64                                  -> iteration error
//   C  A, with stages rounded to binary64 and fed to the machine f~
//   D  A, with the machine coefficients b~, mu~, hb
//
// With the machine f~ and machine coefficients the run emulates fixed-point
// iteration with exact arithmetic around the machine right-hand side.

#include <cstdint>
#include <string>
#include <vector>

#include "symirk/coefficients.hpp"
#include "symirk/irk.hpp"
#include "symirk/problems.hpp"

namespace symirk {

enum class Arithmetic { Extended, Machine };
enum class OracleStop { Exhaustive, DoubleRoundedCoincidence };

struct OracleConfig {
  long bits = kQuadDigits;
  Arithmetic f_variant = Arithmetic::Extended;
  Arithmetic coeff_variant = Arithmetic::Extended;
  OracleStop stop_mode = OracleStop::Exhaustive;
  // Consecutive satisfied sweeps required by the componentwise rule in
  // exhaustive mode.
  int exhaustive_streak = 10;

  void validate() const;

  // Presets "A", "B", "C", "D" and "fpiea" (machine f~ and coefficients).
  static OracleConfig preset(const std::string& name, long bits = kQuadDigits);
};

// bits == 113 runs on IEEE binary128; any other precision runs on MPFR.
// The tableau must carry hb for cfg.h (used by the machine-coefficient
// variant). Sample states are stored as the binary64 pair (fl(y), fl(y - fl(y))).
Trajectory oracle_integrate(const ODESystem& sys, const GaussTableau& g, const MachineTableau& t,
                            const OracleConfig& ocfg, const IntegrationConfig& cfg, const CompensatedVector& y0);

struct ErrorPoint {
  std::int64_t step = 0;
  double time = 0.0;
  std::vector<double> error;  // (y~ + e) - y_ref, componentwise
  double position_norm = 0.0;
  double rel_energy_error = 0.0;         // (H_k - H_0) / H_0 of the trajectory under test
  double ref_rel_energy_error = 0.0;     // same for the reference
};

struct ErrorSeries {
  std::vector<ErrorPoint> points;
};

// Throws InvalidComparison unless both trajectories share the sampling grid.
ErrorSeries true_roundoff_error(const Trajectory& primary, const Trajectory& reference, std::size_t position_dims);

}  // namespace symirk
