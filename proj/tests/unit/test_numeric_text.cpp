#include <doctest.h>

#include <cmath>

#include "symirk/errors.hpp"
#include "symirk/numeric_text.hpp"

using namespace symirk;

TEST_CASE("literals are parsed exactly") {
  CHECK(parse_exact("500/3") == mpq_class(500, 3));
  CHECK(parse_exact("2^-7") == mpq_class(1, 128));
  CHECK(parse_exact("0x1p-7") == mpq_class(1, 128));
  CHECK(parse_exact("0x1.8p1") == mpq_class(3));
  CHECK(parse_exact("1e-8") == mpq_class(1, 100000000));
  CHECK(parse_exact("-3.5") == mpq_class(-7, 2));
  CHECK(parse_exact("10^7") == mpq_class(10000000));
  CHECK(parse_exact("2^10*3") == mpq_class(3072));
  CHECK(parse_exact("1e7/500*3") == mpq_class(60000));
}

TEST_CASE("rounding to binary64 happens once") {
  CHECK(parse_machine_number("500/3") == 500.0 / 3.0);
  CHECK(parse_machine_number("0.1") == 0.1);
  CHECK(parse_machine_number("2^-1074") == std::ldexp(1.0, -1074));
  // 1 + 2^-53 + 2^-80 lies just above the tie and must round up.
  const mpq_class q = mpq_class(1) + mpq_class(1, mpz_class(1) << 53) + mpq_class(1, mpz_class(1) << 80);
  CHECK(round_to_double(q) == 1.0 + 0x1p-52);
  CHECK(round_to_double(mpq_class(1) + mpq_class(1, mpz_class(1) << 53)) == 1.0);
}

TEST_CASE("exact literals read back bitwise") {
  for (double v : {0.1, 500.0 / 3.0, -0x1p-7, 6.02214076e23, 0.0}) {
    CHECK(parse_machine_number(exact_literal(v)) == v);
  }
}

TEST_CASE("malformed literals are rejected") {
  for (const char* bad : {"", "abc", "1/0", "2^x", "1e", "3/", "0x", "1..2"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_exact(bad), InvalidArgument);
  }
}
