#include "symirk/problems.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "symirk/errors.hpp"
#include "symirk/numeric_text.hpp"

#ifndef SYMIRK_DEFAULT_DATA_DIR
#define SYMIRK_DEFAULT_DATA_DIR "data"
#endif

namespace symirk {

std::vector<Quad> to_quad(const CompensatedVector& y) {
  std::vector<Quad> out(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) out[j] = static_cast<Quad>(y.main[j]) + static_cast<Quad>(y.residual[j]);
  return out;
}

Quad energy_of(const ODESystem& sys, const CompensatedVector& y) {
  if (!sys.energy) throw InvalidArgument(sys.label + " has no energy function");
  const std::vector<Quad> q = to_quad(y);
  return sys.energy(q);
}

template <>
void evaluate_rhs<double>(const ODESystem& sys, std::span<const double> y, std::span<double> dy) {
  sys.rhs(y, dy);
}

template <>
void evaluate_rhs<Quad>(const ODESystem& sys, std::span<const Quad> y, std::span<Quad> dy) {
  if (!sys.rhs_quad) throw InvalidArgument(sys.label + " has no extended-precision right-hand side");
  sys.rhs_quad(y, dy);
}

template <>
void evaluate_rhs<MpReal>(const ODESystem& sys, std::span<const MpReal> y, std::span<MpReal> dy) {
  if (!sys.rhs_mp) throw InvalidArgument(sys.label + " has no arbitrary-precision right-hand side");
  sys.rhs_mp(y, dy);
}

// ---------------------------------------------------------------------------
// Double pendulum. With d = p_theta - p_phi,
//   N  = l1^2 (m1+m2) p_theta^2 + l2^2 m2 d^2 + 2 l1 l2 m2 p_theta d cos(theta)
//   Dn = l1^2 l2^2 m2 (-2 m1 - m2 + m2 cos(2 theta))
//   H  = -N/Dn - g cos(phi) (l1 (m1+m2) + l2 m2 cos(theta)) + g l2 m2 sin(theta) sin(phi)
// Partial derivatives are written out in docs/double_pendulum.md.

Quad dp_hamiltonian(std::span<const Quad> y, const DoublePendulumParams& prm) {
  const Quad g = prm.g, l1 = prm.l1, l2 = prm.l2, m1 = prm.m1, m2 = prm.m2;
  const Quad phi = y[0], theta = y[1], pphi = y[2], pth = y[3];
  const Quad d = pth - pphi;
  const Quad num = l1 * l1 * (m1 + m2) * pth * pth + l2 * l2 * m2 * d * d + 2 * l1 * l2 * m2 * pth * d * xp::cos(theta);
  const Quad den = l1 * l1 * l2 * l2 * m2 * (-2 * m1 - m2 + m2 * xp::cos(2 * theta));
  if (den == 0) throw InvalidArgument("double pendulum kinetic denominator vanishes (m1 = 0?)");
  return -num / den - g * xp::cos(phi) * (l1 * (m1 + m2) + l2 * m2 * xp::cos(theta)) +
         g * l2 * m2 * xp::sin(theta) * xp::sin(phi);
}

template <class Real>
void dp_rhs(const DoublePendulumParams& prm, std::span<const Real> y, std::span<Real> dy) {
  using xp::cos;
  using xp::sin;
  const Real g = xp::from_double<Real>(prm.g);
  const Real l1 = xp::from_double<Real>(prm.l1);
  const Real l2 = xp::from_double<Real>(prm.l2);
  const Real m1 = xp::from_double<Real>(prm.m1);
  const Real m2 = xp::from_double<Real>(prm.m2);
  const Real two = xp::from_double<Real>(2.0);

  const Real& phi = y[0];
  const Real& theta = y[1];
  const Real& pphi = y[2];
  const Real& pth = y[3];

  const Real sphi = sin(phi);
  const Real cphi = cos(phi);
  const Real sth = sin(theta);
  const Real cth = cos(theta);
  const Real s2th = sin(two * theta);
  const Real c2th = cos(two * theta);

  const Real d = pth - pphi;
  const Real m12 = m1 + m2;
  const Real l1sq = l1 * l1;
  const Real l2sq = l2 * l2;
  const Real l1l2m2 = l1 * l2 * m2;

  const Real num = l1sq * m12 * pth * pth + l2sq * m2 * d * d + two * l1l2m2 * pth * d * cth;
  const Real den = l1sq * l2sq * m2 * (m2 * c2th - two * m1 - m2);

  const Real num_pphi = -(two * l2sq * m2 * d + two * l1l2m2 * pth * cth);
  const Real num_pth = two * l1sq * m12 * pth + two * l2sq * m2 * d + two * l1l2m2 * (pth + d) * cth;
  const Real num_th = -(two * l1l2m2 * pth * d * sth);
  const Real den_th = -(two * l1sq * l2sq * m2 * m2 * s2th);

  const Real gl2m2 = g * l2 * m2;
  const Real dh_dphi = g * sphi * (l1 * m12 + l2 * m2 * cth) + gl2m2 * sth * cphi;
  const Real dh_dth = num * den_th / (den * den) - num_th / den + gl2m2 * (cphi * sth + cth * sphi);

  dy[0] = -num_pphi / den;
  dy[1] = -num_pth / den;
  dy[2] = -dh_dphi;
  dy[3] = -dh_dth;
}

template void dp_rhs<double>(const DoublePendulumParams&, std::span<const double>, std::span<double>);
template void dp_rhs<Quad>(const DoublePendulumParams&, std::span<const Quad>, std::span<Quad>);
template void dp_rhs<MpReal>(const DoublePendulumParams&, std::span<const MpReal>, std::span<MpReal>);

ODESystem make_double_pendulum(const DoublePendulumParams& prm, std::string label) {
  if (!(prm.g > 0 && prm.l1 > 0 && prm.l2 > 0 && prm.m1 > 0 && prm.m2 > 0)) {
    throw InvalidArgument("double pendulum parameters must be positive");
  }
  ODESystem sys;
  sys.label = std::move(label);
  sys.dimension = 4;
  sys.position_dims = 2;
  sys.rhs = [prm](std::span<const double> y, std::span<double> dy) { dp_rhs<double>(prm, y, dy); };
  sys.rhs_quad = [prm](std::span<const Quad> y, std::span<Quad> dy) { dp_rhs<Quad>(prm, y, dy); };
  sys.rhs_mp = [prm](std::span<const MpReal> y, std::span<MpReal> dy) { dp_rhs<MpReal>(prm, y, dy); };
  sys.energy = [prm](std::span<const Quad> y) { return dp_hamiltonian(y, prm); };
  return sys;
}

// ---------------------------------------------------------------------------
// N-body.

NBodyParams NBodyParams::from_masses(double G, std::vector<double> mass) {
  NBodyParams p;
  p.n_bodies = mass.size();
  p.G = G;
  p.mass = std::move(mass);
  p.gm.resize(p.n_bodies);
  p.gmm.assign(p.n_bodies * p.n_bodies, 0.0);
  for (std::size_t i = 0; i < p.n_bodies; ++i) {
    if (!(p.mass[i] > 0)) throw InvalidArgument("body masses must be positive");
    p.gm[i] = G * p.mass[i];
    for (std::size_t j = 0; j < p.n_bodies; ++j) {
      const mpq_class exact = mpq_class(G) * mpq_class(p.mass[i]) * mpq_class(p.mass[j]);
      p.gmm[i * p.n_bodies + j] = round_to_double(exact);
    }
  }
  return p;
}

Quad oss_hamiltonian(std::span<const Quad> y, const NBodyParams& prm) {
  const std::size_t n = prm.n_bodies;
  const std::size_t off = 3 * n;
  Quad kinetic = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Quad p2 = 0;
    for (std::size_t k = 0; k < 3; ++k) p2 += y[off + 3 * i + k] * y[off + 3 * i + k];
    kinetic += p2 / (2 * static_cast<Quad>(prm.mass[i]));
  }
  Quad potential = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Quad r2 = 0;
      for (std::size_t k = 0; k < 3; ++k) {
        const Quad dq = y[3 * i + k] - y[3 * j + k];
        r2 += dq * dq;
      }
      if (r2 == 0) throw SingularConfiguration("bodies " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      potential += static_cast<Quad>(prm.gmm[i * n + j]) / xp::sqrt(r2);
    }
  }
  return kinetic - potential;
}

template <class Real>
void oss_rhs(const NBodyParams& prm, std::span<const Real> y, std::span<Real> dy) {
  const std::size_t n = prm.n_bodies;
  const std::size_t off = 3 * n;
  for (std::size_t i = 0; i < n; ++i) {
    const Real m = xp::from_double<Real>(prm.mass[i]);
    for (std::size_t k = 0; k < 3; ++k) {
      dy[3 * i + k] = y[off + 3 * i + k] / m;
      dy[off + 3 * i + k] = xp::from_double<Real>(0.0);
    }
  }
  Real dq[3];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = 0; k < 3; ++k) dq[k] = y[3 * i + k] - y[3 * j + k];
      const Real r2 = dq[0] * dq[0] + dq[1] * dq[1] + dq[2] * dq[2];
      if (r2 == xp::from_double<Real>(0.0)) {
        throw SingularConfiguration("bodies " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
      const Real r3 = r2 * xp::sqrt(r2);
      const Real coef = xp::from_double<Real>(prm.gmm[i * n + j]) / r3;
      for (std::size_t k = 0; k < 3; ++k) {
        const Real force = coef * dq[k];
        dy[off + 3 * i + k] -= force;
        dy[off + 3 * j + k] += force;
      }
    }
  }
}

template void oss_rhs<double>(const NBodyParams&, std::span<const double>, std::span<double>);
template void oss_rhs<Quad>(const NBodyParams&, std::span<const Quad>, std::span<Quad>);
template void oss_rhs<MpReal>(const NBodyParams&, std::span<const MpReal>, std::span<MpReal>);

std::array<Quad, 3> oss_angular_momentum(std::span<const Quad> y, std::size_t n_bodies) {
  std::array<Quad, 3> l{0, 0, 0};
  const std::size_t off = 3 * n_bodies;
  for (std::size_t i = 0; i < n_bodies; ++i) {
    const Quad* q = &y[3 * i];
    const Quad* p = &y[off + 3 * i];
    l[0] += q[1] * p[2] - q[2] * p[1];
    l[1] += q[2] * p[0] - q[0] * p[2];
    l[2] += q[0] * p[1] - q[1] * p[0];
  }
  return l;
}

ODESystem make_nbody(const NBodyParams& prm, std::string label) {
  if (prm.n_bodies < 2) throw InvalidArgument("N-body problem needs at least two bodies");
  ODESystem sys;
  sys.label = std::move(label);
  sys.dimension = 6 * prm.n_bodies;
  sys.position_dims = 3 * prm.n_bodies;
  sys.rhs = [prm](std::span<const double> y, std::span<double> dy) { oss_rhs<double>(prm, y, dy); };
  sys.rhs_quad = [prm](std::span<const Quad> y, std::span<Quad> dy) { oss_rhs<Quad>(prm, y, dy); };
  sys.rhs_mp = [prm](std::span<const MpReal> y, std::span<MpReal> dy) { oss_rhs<MpReal>(prm, y, dy); };
  sys.energy = [prm](std::span<const Quad> y) { return oss_hamiltonian(y, prm); };
  const std::size_t n = prm.n_bodies;
  const char* axis[3] = {"Lx", "Ly", "Lz"};
  for (std::size_t k = 0; k < 3; ++k) {
    sys.quadratic_invariants.push_back(
        {axis[k], [n, k](std::span<const Quad> y) { return oss_angular_momentum(y, n)[k]; }});
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Value tables.

ValueTable parse_value_table(const std::string& text) {
  ValueTable table;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'name = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": empty name or value");
    }
    if (!table.emplace(key, value).second) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": duplicate name '" + key + "'");
    }
  }
  return table;
}

ValueTable read_value_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open initial-condition file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_value_table(buf.str());
}

namespace {

const std::string& require(const ValueTable& t, const std::string& key) {
  const auto it = t.find(key);
  if (it == t.end()) throw InvalidArgument("initial-condition table is missing '" + key + "'");
  return it->second;
}

double number(const ValueTable& t, const std::string& key) { return parse_machine_number(require(t, key)); }

}  // namespace

Problem problem_from_table(const ValueTable& table, const std::string& label) {
  Problem out;
  if (table.count("phi") != 0) {
    DoublePendulumParams prm;
    prm.g = number(table, "g");
    prm.l1 = number(table, "l1");
    prm.l2 = number(table, "l2");
    prm.m1 = number(table, "m1");
    prm.m2 = number(table, "m2");
    out.system = make_double_pendulum(prm, label);
    out.y0 = CompensatedVector(
        {number(table, "phi"), number(table, "theta"), number(table, "p_phi"), number(table, "p_theta")});
    return out;
  }
  if (table.count("bodies") != 0) {
    const long n = std::stol(require(table, "bodies"));
    if (n < 2 || n > 64) throw InvalidArgument("bodies must be in [2, 64]");
    const auto nb = static_cast<std::size_t>(n);
    const double G = number(table, "G");
    std::vector<double> mass(nb);
    std::vector<double> y(6 * nb);
    const char* axes = "xyz";
    for (std::size_t i = 0; i < nb; ++i) {
      const std::string id = std::to_string(i);
      const mpq_class m = parse_exact(require(table, "m" + id));
      mass[i] = round_to_double(m);
      for (std::size_t k = 0; k < 3; ++k) {
        const std::string suffix = id + "_" + axes[k];
        y[3 * i + k] = number(table, "q" + suffix);
        y[3 * nb + 3 * i + k] = round_to_double(m * parse_exact(require(table, "v" + suffix)));
      }
    }
    out.system = make_nbody(NBodyParams::from_masses(G, std::move(mass)), label);
    out.y0 = CompensatedVector(std::move(y));
    return out;
  }
  throw InvalidArgument("initial-condition table describes neither a double pendulum nor an N-body system");
}

std::string data_directory() {
  if (const char* env = std::getenv("SYMIRK_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return SYMIRK_DEFAULT_DATA_DIR;
}

Problem load_named_problem(const std::string& name) {
  if (name != "ncdp" && name != "cdp" && name != "oss") {
    throw InvalidArgument("unknown problem '" + name + "' (expected ncdp, cdp or oss)");
  }
  return problem_from_table(read_value_table(data_directory() + "/" + name + ".txt"), name);
}

}  // namespace symirk
