#pragma once

// Exact numeric literals for configuration and data files.
//
// Accepted forms, combined with `*` and `/` left to right:
//   decimal      -3.5023653, 1e-8
//   hex float    0x1.8p-3
//   power        2^-7, 10^7 (integer exponent)
// The value is kept as an exact rational and rounded to binary64 once.

#include <gmpxx.h>

#include <string>

namespace symirk {

mpq_class parse_exact(const std::string& text);
double round_to_double(const mpq_class& q);
double parse_machine_number(const std::string& text);

// Shortest text that reads back to exactly `v` (hex float).
std::string exact_literal(double v);

}  // namespace symirk
