#pragma once

// Run manifest: sectioned `key = value` text.
//
//   [problem]    name = ncdp | cdp | oss, or file = <value table>
//   [method]     stages, h, t_end, m, max_iterations, streak,
//                fallback_abs_tol, fallback_rel_tol
//   [estimator]  mode = off | parallel | sequential, r
//   [ensemble]   P, perturb_rel, threads, bins
//   [oracle]     bits, variant = A | B | C | D | fpiea
//   [output]     dir, seed
//
// Numeric fields take exact expressions (2^-7, 500/3, 0x1p-7, 1e7). The text
// of h and t_end is kept so emit() reproduces it; h is rounded once to binary64.

#include <cstdint>
#include <string>

#include "symirk/irk.hpp"
#include "symirk/oracle.hpp"
#include "symirk/problems.hpp"
#include "symirk/stats.hpp"

namespace symirk {

struct RunManifest {
  std::string problem = "ncdp";
  std::string problem_file;  // non-empty selects a custom value table
  std::size_t stages = 6;
  std::string h_text = "2^-7";
  std::string t_end_text = "2^10";
  std::int64_t m = 1024;
  int max_iterations = 100;
  int streak = 2;
  std::string fallback_abs_tol = "1e-8";
  std::string fallback_rel_tol = "1e-8";
  EstimatorMode estimator_mode = EstimatorMode::Off;
  int r = 3;
  int P = 64;
  std::string perturb_rel = "1e-6";
  unsigned threads = 0;
  std::size_t bins = 50;
  long oracle_bits = kQuadDigits;
  std::string oracle_variant = "A";
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  bool operator==(const RunManifest&) const = default;

  double h() const;                // fl(h)
  std::int64_t n_steps() const;    // t_end / h from the exact values, rounded to nearest
  IntegrationConfig integration() const;
  EnsembleSpec ensemble() const;
  OracleConfig oracle() const;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

// Unknown sections or keys are rejected with ConfigError.
RunManifest parse_manifest(const std::string& text);
RunManifest read_manifest(const std::string& path);
std::string emit_manifest(const RunManifest& m);

// Manifest preset reproducing the published parameter set for a named
// problem (NCDP, CDP, OSS).
RunManifest published_manifest(const std::string& problem);

Problem load_problem(const RunManifest& m);

}  // namespace symirk
