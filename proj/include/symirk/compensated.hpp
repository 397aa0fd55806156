#pragma once

// Compensated accumulation in binary64.
//
// A CompensatedVector (main, residual) represents main + residual, where the
// residual carries the rounding error of the additions that produced main.
// Everything here relies on round-to-nearest-even and on the compiler not
// contracting or reassociating floating-point expressions (the build passes
// -ffp-contract=off and never enables fast-math).

#include <cstddef>
#include <span>
#include <vector>

namespace symirk {

struct CompensatedVector {
  std::vector<double> main;
  std::vector<double> residual;

  CompensatedVector() = default;
  explicit CompensatedVector(std::vector<double> value)
      : main(std::move(value)), residual(main.size(), 0.0) {}
  CompensatedVector(std::vector<double> m, std::vector<double> r) : main(std::move(m)), residual(std::move(r)) {}

  std::size_t size() const noexcept { return main.size(); }
  bool operator==(const CompensatedVector&) const = default;
};

// Throws RangeFailure unless the current rounding mode is round-to-nearest.
void ensure_round_to_nearest();

// One pass of Kahan's algorithm over a single term, componentwise:
//   X = fl(x + e); y' = fl(y + X); Xh = fl(y' - y); e' = fl(X - Xh).
// Throws AccumulationFailure naming the first non-finite component.
void kahan_add(std::span<double> main, std::span<double> residual, std::span<const double> term);

// S_{n,D}: accumulates x_0..x_n into acc in order.
CompensatedVector kahan_accumulate(CompensatedVector acc, std::span<const std::vector<double>> terms);

// Same, with the n+1 terms stored back to back in one buffer of length
// (n+1) * acc.size().
CompensatedVector kahan_accumulate(CompensatedVector acc, std::span<const double> packed_terms);

// fl_{p-r}(x) = fl(2^r x + x) - 2^r x. The scaling is an exact exponent shift.
// Throws InvalidArgument for r outside [0, 53) and RangeFailure if 2^r x
// overflows.
double round_reduced(double x, int r);

// |e_j| <= slack * ulp(main_j) for every component.
bool residual_within_bounds(const CompensatedVector& v, double slack = 4.0);

// Error-free product: returns p = fl(a*b) and sets err = a*b - p exactly.
// Uses FMA where the platform provides it, Dekker splitting otherwise.
double two_product(double a, double b, double& err);
double two_product_dekker(double a, double b, double& err);

// Spacing of binary64 numbers at |x|.
double ulp(double x);

}  // namespace symirk
