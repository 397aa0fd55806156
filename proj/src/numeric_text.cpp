#include "symirk/numeric_text.hpp"

#include <mpfr.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "symirk/errors.hpp"

namespace symirk {
namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  mpq_class parse() {
    mpq_class v = term();
    for (;;) {
      skip_space();
      if (at_end()) break;
      const char op = s_[pos_];
      if (op != '*' && op != '/') fail("unexpected character");
      ++pos_;
      mpq_class rhs = term();
      if (op == '*') {
        v *= rhs;
      } else {
        if (rhs == 0) fail("division by zero");
        v /= rhs;
      }
    }
    return v;
  }

 private:
  mpq_class term() {
    skip_space();
    bool negative = false;
    while (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      if (s_[pos_] == '-') negative = !negative;
      ++pos_;
      skip_space();
    }
    mpq_class v = atom();
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == '^') {
      ++pos_;
      skip_space();
      const long e = integer();
      v = power(v, e);
    }
    return negative ? mpq_class(-v) : v;
  }

  mpq_class atom() {
    skip_space();
    if (s_.compare(pos_, 2, "0x") == 0 || s_.compare(pos_, 2, "0X") == 0) {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double d = std::strtod(begin, &end);
      if (end == begin) fail("bad hex literal");
      pos_ += static_cast<std::size_t>(end - begin);
      mpq_class q(d);
      q.canonicalize();
      return q;
    }
    // Decimal: digits [. digits] [e[+-]digits]
    std::string digits;
    long exp10 = 0;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      digits += s_[pos_++];
      any = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        digits += s_[pos_++];
        --exp10;
        any = true;
      }
    }
    if (!any) fail("expected a number");
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      exp10 += integer();
    }
    mpq_class v{mpz_class(digits, 10)};
    return v * power(mpq_class(10), exp10);
  }

  long integer() {
    bool negative = false;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      negative = s_[pos_] == '-';
      ++pos_;
    }
    long v = 0;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      if (v > 100000) fail("exponent too large");
      any = true;
    }
    if (!any) fail("expected an integer exponent");
    return negative ? -v : v;
  }

  static mpq_class power(const mpq_class& base, long e) {
    mpz_class num;
    mpz_class den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(std::labs(e)));
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(std::labs(e)));
    mpq_class r = e >= 0 ? mpq_class(num, den) : mpq_class(den, num);
    r.canonicalize();
    return r;
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  [[noreturn]] void fail(const std::string& why) const {
    throw InvalidArgument("cannot parse number '" + s_ + "': " + why);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

mpq_class parse_exact(const std::string& text) { return Parser(text).parse(); }

double round_to_double(const mpq_class& q) {
  mpfr_t x;
  mpfr_init2(x, 53);
  mpfr_set_q(x, q.get_mpq_t(), MPFR_RNDN);
  const double d = mpfr_get_d(x, MPFR_RNDN);
  mpfr_clear(x);
  return d;
}

double parse_machine_number(const std::string& text) { return round_to_double(parse_exact(text)); }

std::string exact_literal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace symirk
