#include <doctest.h>
#include <gmpxx.h>

#include <cmath>

#include "symirk/xprec.hpp"

using namespace symirk;

namespace {

// |a - q| for an MPFR value a and exact rational q, as a double.
double distance(const MpReal& a, const mpq_class& q) {
  mpq_class x;
  mpfr_get_q(x.get_mpq_t(), a.get());
  return mpq_class(abs(x - q)).get_d();
}

}  // namespace

TEST_CASE("MpReal arithmetic is correctly rounded at the default precision") {
  MpPrecisionGuard guard(160);
  const MpReal third = MpReal(1.0) / MpReal(3.0);
  CHECK(third.bits() == 160);
  CHECK(distance(third, mpq_class(1, 3)) <= std::ldexp(1.0, -161));

  const MpReal sum = third + third + third;
  CHECK(distance(sum, mpq_class(1)) <= std::ldexp(1.0, -158));
  CHECK(std::fabs((xp::sqrt(MpReal(2.0)) * xp::sqrt(MpReal(2.0))).to_double() - 2.0) == 0.0);
}

TEST_CASE("precision guard restores the previous default") {
  const long before = MpReal::default_bits();
  {
    MpPrecisionGuard guard(300);
    CHECK(MpReal::default_bits() == 300);
    CHECK(MpReal(1.0).bits() == 300);
  }
  CHECK(MpReal::default_bits() == before);
}

TEST_CASE("quad values survive the text round trip") {
  const Quad x = Quad(1) / 3;
  CHECK(quad_from_string(quad_to_string(x)) == x);
  CHECK(quad_from_string("0.5") == Quad(0.5));
}

TEST_CASE("split_double gives the leading double and the rounded remainder") {
  const Quad x = Quad(1) + Quad(0x1p-60);
  const auto [hi, lo] = xp::split_double(x);
  CHECK(hi == 1.0);
  CHECK(lo == 0x1p-60);

  MpPrecisionGuard guard(200);
  const MpReal y = MpReal(1.0) / MpReal(7.0);
  const auto [h2, l2] = xp::split_double(y);
  CHECK(h2 == 1.0 / 7.0);
  CHECK(std::fabs(l2) <= std::ldexp(1.0, -56));
}

TEST_CASE("conversions between scalar kinds") {
  MpPrecisionGuard guard(160);
  const MpReal m = MpReal::from_quad(Quad(1) / 3);
  CHECK(m.to_quad() == Quad(1) / 3);
  CHECK(xp::from_mp<double>(m) == 1.0 / 3.0);
  CHECK(xp::isfinite(Quad(1)));
  CHECK_FALSE(xp::isfinite(Quad(1) / Quad(0)));
}
