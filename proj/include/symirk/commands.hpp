#pragma once

// Subcommands behind the `symirk` executable. Each writes CSV files (header
// row, 17 significant digits) plus a copy of the effective manifest into the
// output directory, and throws on failure.
//
//   coeffs     machine tableau for s stages, with the bitwise symplecticity check
//   integrate  trajectory.csv, diagnostics.csv
//   estimate   trajectory.csv, secondary.csv, estimate.csv, diagnostics.csv
//   ensemble   jumps.csv, histogram.csv, drift.csv, fit_summary.csv, iterations.csv
//   decompose  oracle_trajectory.csv, energy_error.csv, diagnostics.csv

#include <iosfwd>
#include <string>

#include "symirk/manifest.hpp"

namespace symirk {

// 0 quiet, 1 progress, 2 detail. Read from $SYMIRK_VERBOSE.
int verbosity_from_env();

struct CommandLog {
  std::ostream& out;
  int verbosity = 0;
  void info(const std::string& msg) const;
  void detail(const std::string& msg) const;
};

// Returns false when the symplecticity self-check fails.
bool cmd_coeffs(std::size_t stages, bool hex, std::ostream& out);

void cmd_integrate(const RunManifest& m, const CommandLog& log);
void cmd_estimate(const RunManifest& m, const CommandLog& log);
void cmd_ensemble(const RunManifest& m, const CommandLog& log);
void cmd_decompose(const RunManifest& m, const CommandLog& log);

void write_trajectory_csv(std::ostream& os, const Trajectory& t);

}  // namespace symirk
