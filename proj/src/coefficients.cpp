#include "symirk/coefficients.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "symirk/errors.hpp"

namespace symirk {
namespace {

constexpr int kMaxRootIterations = 200;

struct LegendrePair {
  MpReal p;       // P_n(x)
  MpReal p_prev;  // P_{n-1}(x)
};

LegendrePair legendre(std::size_t n, const MpReal& x) {
  MpReal prev = 1.0;
  MpReal cur = x;
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    MpReal next = (MpReal(2.0 * kk + 1.0) * x * cur - MpReal(kk) * prev) / MpReal(kk + 1.0);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return {cur, prev};
}

double legendre_double(std::size_t n, double x) {
  double prev = 1.0;
  double cur = x;
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double next = ((2.0 * kk + 1.0) * x * cur - kk * prev) / (kk + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

MpReal legendre_derivative(std::size_t n, const MpReal& x, const LegendrePair& v) {
  return MpReal(static_cast<double>(n)) * (x * v.p - v.p_prev) / (x * x - MpReal(1.0));
}

int sign(const MpReal& v) { return mpfr_sgn(v.get()); }

// Newton iteration kept inside a sign-change bracket; falls back to bisection
// whenever the Newton update leaves the bracket.
MpReal refine_root(std::size_t n, double lo_d, double hi_d, long bits) {
  MpReal lo = lo_d;
  MpReal hi = hi_d;
  const int sign_lo = sign(legendre(n, lo).p);
  MpReal x = (lo + hi) / MpReal(2.0);
  MpReal tol = 1.0;
  mpfr_mul_2si(tol.get(), tol.get(), -(bits - 2), MPFR_RNDN);

  for (int it = 0; it < kMaxRootIterations; ++it) {
    const LegendrePair v = legendre(n, x);
    const int sx = sign(v.p);
    if (sx == 0) return x;
    if (sx == sign_lo) {
      lo = x;
    } else {
      hi = x;
    }
    const MpReal dp = legendre_derivative(n, x, v);
    MpReal next = x - v.p / dp;
    if (!(next > lo && next < hi)) next = (lo + hi) / MpReal(2.0);
    const MpReal step = xp::abs(next - x);
    x = std::move(next);
    if (step <= tol || hi - lo <= tol) {
      return x;
    }
  }
  throw GenerationFailure("Legendre root refinement did not converge for degree " + std::to_string(n));
}

double two_sum_error(double a, double b, double& sum) {
  sum = a + b;
  const double bb = sum - a;
  return (a - (sum - bb)) + (b - bb);
}

}  // namespace

GaussTableau generate_gauss(std::size_t s, long bits) {
  if (s < 1 || s > kMaxStages) {
    throw InvalidArgument("stage count must be in [1, " + std::to_string(kMaxStages) + "], got " + std::to_string(s));
  }
  if (bits < 2 * kMachineDigits) {
    throw InvalidArgument("tableau precision must be at least 106 bits, got " + std::to_string(bits));
  }
  MpPrecisionGuard guard(bits);

  // Bracket the roots of P_s on [-1, 1] from a fine double-precision scan. The
  // odd interval count keeps grid points off the root at 0.
  const std::size_t grid = 64 * s * s + 65;
  std::vector<std::pair<double, double>> brackets;
  double prev_x = -1.0;
  double prev_v = legendre_double(s, prev_x);
  for (std::size_t k = 1; k <= grid; ++k) {
    const double x = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(grid);
    const double v = legendre_double(s, x);
    if ((prev_v < 0) != (v < 0)) brackets.emplace_back(prev_x, x);
    prev_x = x;
    prev_v = v;
  }
  if (brackets.size() != s) {
    throw GenerationFailure("found " + std::to_string(brackets.size()) + " Legendre root brackets, expected " +
                            std::to_string(s));
  }

  std::vector<MpReal> x(s);
  const std::size_t half = s / 2;
  for (std::size_t i = 0; i < half; ++i) {
    x[i] = refine_root(s, brackets[i].first, brackets[i].second, bits);
    x[s - 1 - i] = -x[i];
  }
  if (s % 2 == 1) x[half] = 0.0;

  GaussTableau g;
  g.s = s;
  g.bits = bits;
  g.c.resize(s);
  g.b.resize(s);
  for (std::size_t i = 0; i < s; ++i) {
    g.c[i] = (MpReal(1.0) + x[i]) / MpReal(2.0);
  }
  for (std::size_t i = 0; i < half; ++i) {
    const LegendrePair v = legendre(s, x[i]);
    const MpReal dp = legendre_derivative(s, x[i], v);
    g.b[i] = MpReal(1.0) / ((MpReal(1.0) - x[i] * x[i]) * dp * dp);
    g.b[s - 1 - i] = g.b[i];
  }
  if (s % 2 == 1) {
    if (s == 1) {
      g.b[0] = 1.0;
    } else {
      const LegendrePair v = legendre(s, x[half]);
      const MpReal dp = legendre_derivative(s, x[half], v);
      g.b[half] = MpReal(1.0) / (dp * dp);
    }
  }

  // a_ij = int_0^{c_i} l_j(t) dt, evaluated with the s-point rule on [0, c_i]
  // (exact because l_j has degree s-1).
  auto lagrange = [&](std::size_t j, const MpReal& t) {
    MpReal v = 1.0;
    for (std::size_t m = 0; m < s; ++m) {
      if (m == j) continue;
      v *= (t - g.c[m]) / (g.c[j] - g.c[m]);
    }
    return v;
  };
  g.a.assign(s * s, MpReal(0.0));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      MpReal acc = 0.0;
      for (std::size_t k = 0; k < s; ++k) acc += g.b[k] * lagrange(j, g.c[i] * g.c[k]);
      g.a[i * s + j] = g.c[i] * acc;
    }
  }
  return g;
}

TableauCheck check_gauss(const GaussTableau& g) {
  MpPrecisionGuard guard(g.bits);
  TableauCheck r;
  const std::size_t s = g.s;
  auto upd = [](double& slot, const MpReal& v) { slot = std::max(slot, xp::abs(v).to_double()); };
  MpReal bsum = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    upd(r.node_symmetry, g.c[i] + g.c[s - 1 - i] - MpReal(1.0));
    bsum += g.b[i];
    for (std::size_t j = 0; j < s; ++j) {
      upd(r.symplecticity, g.b[i] * g.A(i, j) + g.b[j] * g.A(j, i) - g.b[i] * g.b[j]);
    }
  }
  upd(r.weight_sum, bsum - MpReal(1.0));
  for (std::size_t k = 1; k <= 2 * s; ++k) {
    MpReal acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      MpReal p = 1.0;
      for (std::size_t e = 1; e < k; ++e) p *= g.c[i];
      acc += g.b[i] * p;
    }
    upd(r.order_conditions, acc - MpReal(1.0) / MpReal(static_cast<double>(k)));
  }
  return r;
}

MachineTableau make_machine_tableau(const GaussTableau& g) {
  const std::size_t s = g.s;
  MachineTableau t;
  t.s = s;
  t.b_tilde.resize(s);
  t.mu_tilde.assign(s * s, 0.0);

  mpfr_t q;
  mpfr_init2(q, kMachineDigits);
  for (std::size_t i = 0; i < s; ++i) {
    t.b_tilde[i] = g.b[i].to_double();
    t.mu_tilde[i * s + i] = 0.5;
    for (std::size_t j = 0; j < i; ++j) {
      // One correctly rounded division of the extended-precision operands.
      mpfr_div(q, g.A(i, j).get(), g.b[j].get(), MPFR_RNDN);
      const double mu = mpfr_get_d(q, MPFR_RNDN);
      const double mag = std::fabs(mu);
      double sum = 0;
      if (!(mag > 0.5 && mag < 2.0)) {
        mpfr_clear(q);
        throw UnsupportedTableau("|mu(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                     ")| = " + std::to_string(mag) + " outside (1/2, 2)",
                                 i, j);
      }
      const double upper = 1.0 - mu;
      if (two_sum_error(mu, upper, sum) != 0.0 || sum != 1.0) {
        mpfr_clear(q);
        throw UnsupportedTableau("1 - mu(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                     ") is not a machine number",
                                 i, j);
      }
      t.mu_tilde[i * s + j] = mu;
      t.mu_tilde[j * s + i] = upper;
    }
  }
  mpfr_clear(q);
  return t;
}

std::vector<double> precompute_hb(const MachineTableau& t, const GaussTableau& g, double h) {
  if (!std::isfinite(h) || !(h > 0)) {
    throw InvalidArgument("step size must be finite and positive");
  }
  const std::size_t s = t.s;
  std::vector<double> hb(s, 0.0);
  if (s == 1) {
    hb[0] = h;
    return hb;
  }
  mpfr_t prod;
  mpfr_init2(prod, kMachineDigits);
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < s; ++i) {
    mpfr_mul_d(prod, g.b[i].get(), h, MPFR_RNDN);
    hb[i] = mpfr_get_d(prod, MPFR_RNDN);
    interior += hb[i];
  }
  mpfr_clear(prod);
  const double end = (h - interior) / 2.0;
  hb[0] = end;
  hb[s - 1] = end;
  return hb;
}

MachineTableau make_method(std::size_t s, double h) {
  const GaussTableau g = generate_gauss(s);
  MachineTableau t = make_machine_tableau(g);
  t.hb = precompute_hb(t, g, h);
  t.h = h;
  return t;
}

bool is_bitwise_symplectic(const MachineTableau& t) {
  for (std::size_t i = 0; i < t.s; ++i) {
    for (std::size_t j = 0; j < t.s; ++j) {
      double sum = 0;
      const double err = two_sum_error(t.mu(i, j), t.mu(j, i), sum);
      if (sum != 1.0 || err != 0.0) return false;
    }
  }
  return true;
}

std::string format_tableau(const MachineTableau& t, bool hex) {
  std::ostringstream out;
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, hex ? "%a" : "%.17g", v);
    return std::string(buf);
  };
  out << "stages = " << t.s << "\n";
  for (std::size_t i = 0; i < t.s; ++i) out << "b[" << i + 1 << "] = " << fmt(t.b_tilde[i]) << "\n";
  for (std::size_t i = 0; i < t.s; ++i) {
    for (std::size_t j = 0; j < t.s; ++j) {
      out << "mu[" << i + 1 << "][" << j + 1 << "] = " << fmt(t.mu(i, j)) << "\n";
    }
  }
  return out.str();
}

MachineTableau parse_tableau(const std::string& text) {
  MachineTableau t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, line.find_first_of(" =["));
    const std::string value = line.substr(eq + 1);
    std::size_t i = 0;
    std::size_t j = 0;
    if (key == "stages") {
      t.s = std::stoul(value);
      t.b_tilde.assign(t.s, 0.0);
      t.mu_tilde.assign(t.s * t.s, 0.0);
    } else if (key == "b" && std::sscanf(line.c_str(), "b[%zu]", &i) == 1 && i >= 1 && i <= t.s) {
      t.b_tilde[i - 1] = std::strtod(value.c_str(), nullptr);
    } else if (key == "mu" && std::sscanf(line.c_str(), "mu[%zu][%zu]", &i, &j) == 2 && i >= 1 && j >= 1 &&
               i <= t.s && j <= t.s) {
      t.mu_tilde[(i - 1) * t.s + (j - 1)] = std::strtod(value.c_str(), nullptr);
    } else {
      throw InvalidArgument("unrecognised tableau line: " + line);
    }
  }
  if (t.s == 0) throw InvalidArgument("tableau text has no stage count");
  return t;
}

}  // namespace symirk
