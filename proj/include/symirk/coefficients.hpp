#pragma once

// Gauss collocation tableaus.
//
// GaussTableau holds the exact method in extended precision. MachineTableau
// holds binary64 coefficients in the mu-form of the method,
//
//   Y_i = y + sum_j mu_ij L_j,   L_i = h b_i f(Y_i),   y' = y + sum_i L_i,
//
// with mu_ij = a_ij / b_j. Symplecticity reads mu_ij + mu_ji = 1, which the
// machine coefficients satisfy without rounding.

#include <cstddef>
#include <string>
#include <vector>

#include "symirk/xprec.hpp"

namespace symirk {

struct GaussTableau {
  std::size_t s = 0;
  long bits = 0;
  std::vector<MpReal> c;
  std::vector<MpReal> b;
  std::vector<MpReal> a;  // row-major s x s

  const MpReal& A(std::size_t i, std::size_t j) const { return a[i * s + j]; }
};

struct MachineTableau {
  std::size_t s = 0;
  std::vector<double> b_tilde;
  std::vector<double> mu_tilde;  // row-major s x s
  // Step-dependent weights h*b_i; empty until precompute_hb has been applied.
  std::vector<double> hb;
  double h = 0.0;

  double mu(std::size_t i, std::size_t j) const { return mu_tilde[i * s + j]; }
};

inline constexpr long kDefaultTableauBits = 2 * kMachineDigits + 54;  // 160
inline constexpr std::size_t kMaxStages = 16;

// Nodes are the roots of the shifted Legendre polynomial of degree s.
// Throws GenerationFailure if root refinement stalls, InvalidArgument if s or
// bits is out of range.
GaussTableau generate_gauss(std::size_t s, long bits = kDefaultTableauBits);

// Throws UnsupportedTableau when a lower-triangle ratio a_ij/b_j rounds outside
// (1/2, 2).
MachineTableau make_machine_tableau(const GaussTableau& g);

// hb_i = fl(h b_i) for the interior stages; the two end weights absorb the
// remainder so that sum hb_i reproduces h.
std::vector<double> precompute_hb(const MachineTableau& t, const GaussTableau& g, double h);

// Convenience: generate, convert and attach hb for step h.
MachineTableau make_method(std::size_t s, double h);

// Residuals of the invariants; all zero / tiny for a valid tableau.
struct TableauCheck {
  double node_symmetry = 0;   // max |c_i + c_{s+1-i} - 1|
  double weight_sum = 0;      // |sum b - 1|
  double symplecticity = 0;   // max |b_i a_ij + b_j a_ji - b_i b_j|
  double order_conditions = 0;  // max_k |sum b_i c_i^(k-1) - 1/k|, k = 1..2s
};
TableauCheck check_gauss(const GaussTableau& g);

// True when every machine sum mu_ij + mu_ji equals 1 with a zero two-sum
// error term.
bool is_bitwise_symplectic(const MachineTableau& t);

// Text dump of b~ and mu~. In hex mode every value is printed as an exact
// hexadecimal floating-point literal.
std::string format_tableau(const MachineTableau& t, bool hex);
MachineTableau parse_tableau(const std::string& text);

}  // namespace symirk
