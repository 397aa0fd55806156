#pragma once

// Extended-precision scalars used for tableau generation, energies and the
// reference integrator.
//
//   Quad    IEEE binary128 (113-bit significand), correctly rounded + - * / sqrt
//   MpReal  MPFR number whose precision is taken from a thread-local default
//
// Free functions in `xp` give templates one spelling for double, Quad and
// MpReal.

#include <mpfr.h>

#include <cmath>
#include <string>
#include <utility>

namespace symirk {

using Quad = __float128;

inline constexpr int kMachineDigits = 53;  // p for binary64
inline constexpr int kQuadDigits = 113;

class MpReal {
 public:
  // Precision (bits) of values created on this thread.
  static long default_bits() noexcept;
  static void set_default_bits(long bits);

  MpReal() : MpReal(0.0) {}
  MpReal(double v);  // NOLINT(google-explicit-constructor)
  MpReal(int v) : MpReal(static_cast<double>(v)) {}  // NOLINT
  MpReal(const MpReal& other);
  MpReal(MpReal&& other) noexcept;
  MpReal& operator=(const MpReal& other);
  MpReal& operator=(MpReal&& other) noexcept;
  ~MpReal();

  static MpReal with_bits(long bits, double v);
  static MpReal from_quad(Quad q);

  long bits() const noexcept { return mpfr_get_prec(value_); }
  mpfr_ptr get() noexcept { return value_; }
  mpfr_srcptr get() const noexcept { return value_; }

  double to_double() const noexcept { return mpfr_get_d(value_, MPFR_RNDN); }
  Quad to_quad() const noexcept;
  std::string to_string(int digits = 40) const;

  MpReal& operator+=(const MpReal& o);
  MpReal& operator-=(const MpReal& o);
  MpReal& operator*=(const MpReal& o);
  MpReal& operator/=(const MpReal& o);

  friend MpReal operator+(MpReal a, const MpReal& b) { return a += b; }
  friend MpReal operator-(MpReal a, const MpReal& b) { return a -= b; }
  friend MpReal operator*(MpReal a, const MpReal& b) { return a *= b; }
  friend MpReal operator/(MpReal a, const MpReal& b) { return a /= b; }
  MpReal operator-() const;

  friend bool operator==(const MpReal& a, const MpReal& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }
  friend bool operator!=(const MpReal& a, const MpReal& b) { return !(a == b); }
  friend bool operator<(const MpReal& a, const MpReal& b) { return mpfr_less_p(a.value_, b.value_) != 0; }
  friend bool operator>(const MpReal& a, const MpReal& b) { return b < a; }
  friend bool operator<=(const MpReal& a, const MpReal& b) { return mpfr_lessequal_p(a.value_, b.value_) != 0; }
  friend bool operator>=(const MpReal& a, const MpReal& b) { return b <= a; }

 private:
  struct Uninit {};
  MpReal(Uninit, long bits);

  mpfr_t value_;
};

// Sets the MpReal default precision for the current scope.
class MpPrecisionGuard {
 public:
  explicit MpPrecisionGuard(long bits) : saved_(MpReal::default_bits()) { MpReal::set_default_bits(bits); }
  ~MpPrecisionGuard() { MpReal::set_default_bits(saved_); }
  MpPrecisionGuard(const MpPrecisionGuard&) = delete;
  MpPrecisionGuard& operator=(const MpPrecisionGuard&) = delete;

 private:
  long saved_;
};

std::string quad_to_string(Quad q, int digits = 36);
Quad quad_from_string(const std::string& s);

namespace xp {

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double abs(double x) { return std::fabs(x); }
inline bool isfinite(double x) { return std::isfinite(x); }

Quad sin(Quad x);
Quad cos(Quad x);
Quad sqrt(Quad x);
inline Quad abs(Quad x) { return x < 0 ? -x : x; }
inline bool isfinite(Quad x) { return x - x == 0; }

MpReal sin(const MpReal& x);
MpReal cos(const MpReal& x);
MpReal sqrt(const MpReal& x);
MpReal abs(const MpReal& x);
inline bool isfinite(const MpReal& x) { return mpfr_number_p(x.get()) != 0; }

// Conversions between the three scalar kinds. Narrowing conversions round to
// nearest once.
template <class Real>
Real from_double(double v);
template <>
inline double from_double<double>(double v) { return v; }
template <>
inline Quad from_double<Quad>(double v) { return v; }
template <>
inline MpReal from_double<MpReal>(double v) { return MpReal(v); }

inline double to_double(double v) { return v; }
inline double to_double(Quad v) { return static_cast<double>(v); }
inline double to_double(const MpReal& v) { return v.to_double(); }

inline Quad to_quad(double v) { return v; }
inline Quad to_quad(Quad v) { return v; }
inline Quad to_quad(const MpReal& v) { return v.to_quad(); }

template <class Real>
Real from_mp(const MpReal& v);
template <>
inline double from_mp<double>(const MpReal& v) { return v.to_double(); }
template <>
inline Quad from_mp<Quad>(const MpReal& v) { return v.to_quad(); }
template <>
inline MpReal from_mp<MpReal>(const MpReal& v) { return v; }

// Splits x into hi = fl(x) and lo = fl(x - hi).
template <class Real>
std::pair<double, double> split_double(const Real& x) {
  const double hi = to_double(x);
  const Real rest = x - from_double<Real>(hi);
  return {hi, to_double(rest)};
}

}  // namespace xp
}  // namespace symirk
