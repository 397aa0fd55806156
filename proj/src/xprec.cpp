#define MPFR_WANT_FLOAT128 1
#include "symirk/xprec.hpp"

#include <quadmath.h>

#include <cstdio>
#include <vector>

#include "symirk/errors.hpp"

namespace symirk {
namespace {

thread_local long t_default_bits = 160;

}  // namespace

long MpReal::default_bits() noexcept { return t_default_bits; }

void MpReal::set_default_bits(long bits) {
  if (bits < MPFR_PREC_MIN || bits > 4096) {
    throw InvalidArgument("MpReal precision out of range: " + std::to_string(bits));
  }
  t_default_bits = bits;
}

MpReal::MpReal(Uninit, long bits) { mpfr_init2(value_, bits); }

MpReal::MpReal(double v) : MpReal(Uninit{}, t_default_bits) { mpfr_set_d(value_, v, MPFR_RNDN); }

MpReal::MpReal(const MpReal& other) : MpReal(Uninit{}, mpfr_get_prec(other.value_)) {
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

MpReal::MpReal(MpReal&& other) noexcept : MpReal(Uninit{}, mpfr_get_prec(other.value_)) {
  mpfr_swap(value_, other.value_);
}

MpReal& MpReal::operator=(const MpReal& other) {
  if (this != &other) {
    mpfr_set_prec(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

MpReal& MpReal::operator=(MpReal&& other) noexcept {
  mpfr_swap(value_, other.value_);
  return *this;
}

MpReal::~MpReal() { mpfr_clear(value_); }

MpReal MpReal::with_bits(long bits, double v) {
  MpReal r(Uninit{}, bits);
  mpfr_set_d(r.value_, v, MPFR_RNDN);
  return r;
}

MpReal MpReal::from_quad(Quad q) {
  MpReal r(Uninit{}, t_default_bits);
  mpfr_set_float128(r.value_, q, MPFR_RNDN);
  return r;
}

Quad MpReal::to_quad() const noexcept { return mpfr_get_float128(value_, MPFR_RNDN); }

std::string MpReal::to_string(int digits) const {
  std::vector<char> buf(static_cast<std::size_t>(digits) + 32);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, value_);
  return buf.data();
}

// Results take the thread default precision, not the operand precision.
#define SYMIRK_MP_BINOP(op, fn)                               \
  MpReal& MpReal::op(const MpReal& o) {                       \
    if (mpfr_get_prec(value_) != t_default_bits) {            \
      MpReal r(Uninit{}, t_default_bits);                     \
      fn(r.value_, value_, o.value_, MPFR_RNDN);              \
      mpfr_swap(value_, r.value_);                            \
    } else {                                                  \
      fn(value_, value_, o.value_, MPFR_RNDN);                \
    }                                                         \
    return *this;                                             \
  }

SYMIRK_MP_BINOP(operator+=, mpfr_add)
SYMIRK_MP_BINOP(operator-=, mpfr_sub)
SYMIRK_MP_BINOP(operator*=, mpfr_mul)
SYMIRK_MP_BINOP(operator/=, mpfr_div)
#undef SYMIRK_MP_BINOP

MpReal MpReal::operator-() const {
  MpReal r(*this);
  mpfr_neg(r.value_, r.value_, MPFR_RNDN);
  return r;
}

std::string quad_to_string(Quad q, int digits) {
  char buf[128];
  quadmath_snprintf(buf, sizeof buf, "%.*Qg", digits, q);
  return buf;
}

Quad quad_from_string(const std::string& s) { return strtoflt128(s.c_str(), nullptr); }

namespace xp {

Quad sin(Quad x) { return sinq(x); }
Quad cos(Quad x) { return cosq(x); }
Quad sqrt(Quad x) { return sqrtq(x); }

namespace {
template <int (*Fn)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)>
MpReal unary(const MpReal& x) {
  MpReal r = MpReal::with_bits(MpReal::default_bits(), 0.0);
  Fn(r.get(), x.get(), MPFR_RNDN);
  return r;
}
}  // namespace

MpReal sin(const MpReal& x) { return unary<mpfr_sin>(x); }
MpReal cos(const MpReal& x) { return unary<mpfr_cos>(x); }
MpReal sqrt(const MpReal& x) { return unary<mpfr_sqrt>(x); }
MpReal abs(const MpReal& x) { return unary<mpfr_abs>(x); }

}  // namespace xp
}  // namespace symirk
