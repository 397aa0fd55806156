#include "symirk/compensated.hpp"

#include <cfenv>
#include <cmath>
#include <limits>
#include <string>

#include "symirk/errors.hpp"

namespace symirk {

void ensure_round_to_nearest() {
  if (std::fegetround() != FE_TONEAREST) {
    throw RangeFailure("floating-point rounding mode is not round-to-nearest");
  }
}

void kahan_add(std::span<double> main, std::span<double> residual, std::span<const double> term) {
  const std::size_t n = main.size();
  if (residual.size() != n || term.size() != n) {
    throw InvalidArgument("kahan_add: length mismatch");
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double x = term[j] + residual[j];
    const double y = main[j] + x;
    const double xh = y - main[j];
    const double e = x - xh;
    if (!std::isfinite(y) || !std::isfinite(e)) {
      throw AccumulationFailure("compensated accumulation overflowed at component " + std::to_string(j), j);
    }
    main[j] = y;
    residual[j] = e;
  }
}

CompensatedVector kahan_accumulate(CompensatedVector acc, std::span<const std::vector<double>> terms) {
  for (const auto& term : terms) kahan_add(acc.main, acc.residual, term);
  return acc;
}

CompensatedVector kahan_accumulate(CompensatedVector acc, std::span<const double> packed_terms) {
  const std::size_t d = acc.size();
  if (d == 0 || packed_terms.size() % d != 0) {
    throw InvalidArgument("kahan_accumulate: packed terms are not a multiple of the state length");
  }
  for (std::size_t off = 0; off < packed_terms.size(); off += d) {
    kahan_add(acc.main, acc.residual, packed_terms.subspan(off, d));
  }
  return acc;
}

double round_reduced(double x, int r) {
  if (r < 0 || r >= std::numeric_limits<double>::digits) {
    throw InvalidArgument("mantissa reduction must be in [0, 53), got " + std::to_string(r));
  }
  const double scaled = std::ldexp(x, r);
  if (!std::isfinite(scaled)) {
    throw RangeFailure("2^r x overflows in reduced-mantissa rounding");
  }
  return (scaled + x) - scaled;
}

double ulp(double x) {
  const double a = std::fabs(x);
  if (!std::isfinite(a)) return std::numeric_limits<double>::quiet_NaN();
  if (a < std::numeric_limits<double>::min()) return std::numeric_limits<double>::denorm_min();
  int exp = 0;
  std::frexp(a, &exp);  // a = m * 2^exp, m in [0.5, 1)
  return std::ldexp(1.0, exp - std::numeric_limits<double>::digits);
}

bool residual_within_bounds(const CompensatedVector& v, double slack) {
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v.main[j]) || !std::isfinite(v.residual[j])) return false;
    if (v.main[j] == 0.0) {
      if (v.residual[j] != 0.0) return false;
      continue;
    }
    if (std::fabs(v.residual[j]) > slack * ulp(v.main[j])) return false;
  }
  return true;
}

double two_product_dekker(double a, double b, double& err) {
  constexpr double kSplitter = 134217729.0;  // 2^27 + 1
  const double p = a * b;
  double t = kSplitter * a;
  const double ah = t - (t - a);
  const double al = a - ah;
  t = kSplitter * b;
  const double bh = t - (t - b);
  const double bl = b - bh;
  err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
  return p;
}

double two_product(double a, double b, double& err) {
  const double p = a * b;
  err = std::fma(a, b, -p);
  return p;
}

}  // namespace symirk
