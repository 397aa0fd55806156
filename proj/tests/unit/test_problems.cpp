#include <doctest.h>
#include <gmpxx.h>
#include <quadmath.h>

#include <cmath>
#include <vector>

#include "symirk/errors.hpp"
#include "symirk/numeric_text.hpp"
#include "symirk/problems.hpp"

using namespace symirk;

namespace {

// H = 1/2 p^T M(theta)^{-1} p + V from the Lagrangian mass matrix of two
// point masses on rigid rods, theta measured relative to the first rod.
Quad dp_energy_from_mass_matrix(std::span<const Quad> y, const DoublePendulumParams& prm) {
  const Quad g = prm.g, l1 = prm.l1, l2 = prm.l2, m1 = prm.m1, m2 = prm.m2;
  const Quad phi = y[0], theta = y[1];
  const Quad c = cosq(theta);
  const Quad a = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + 2 * m2 * l1 * l2 * c;
  const Quad b = m2 * l2 * l2 + m2 * l1 * l2 * c;
  const Quad d = m2 * l2 * l2;
  const Quad det = a * d - b * b;
  const Quad p1 = y[2], p2 = y[3];
  const Quad kinetic = (d * p1 * p1 - 2 * b * p1 * p2 + a * p2 * p2) / (2 * det);
  const Quad y1 = -l1 * cosq(phi);
  const Quad y2 = y1 - l2 * cosq(phi + theta);
  return kinetic + g * (m1 * y1 + m2 * y2);
}

std::vector<Quad> as_quad(const std::vector<double>& v) { return {v.begin(), v.end()}; }

// Central differences of H give (dH/dp, -dH/dq), which Hamilton's equations
// equate to the vector field.
template <class Energy>
std::vector<Quad> hamiltonian_field(const Energy& energy, std::vector<Quad> y, std::size_t half) {
  std::vector<Quad> f(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const Quad step = Quad(1e-9) * (1 + fabsq(y[j]));
    const Quad keep = y[j];
    y[j] = keep + step;
    const Quad up = energy(y);
    y[j] = keep - step;
    const Quad down = energy(y);
    y[j] = keep;
    const Quad dh = (up - down) / (2 * step);
    if (j < half) {
      f[j + half] = -dh;
    } else {
      f[j - half] = dh;
    }
  }
  return f;
}

Quad max_abs(const std::vector<Quad>& v) {
  Quad m = 0;
  for (Quad x : v) m = fmaxq(m, fabsq(x));
  return m;
}

}  // namespace

TEST_CASE("double pendulum energy matches the mass-matrix form") {
  const DoublePendulumParams prm{9.8, 1.0, 1.3, 0.7, 1.9};
  for (const auto& y : std::vector<std::vector<double>>{{1.1, -1.1, 2.7746, 2.7746}, {0.3, 2.0, -1.0, 0.5}, {-2.5, 0.1, 0.0, 3.0}}) {
    const auto q = as_quad(y);
    const Quad a = dp_hamiltonian(q, prm);
    const Quad b = dp_energy_from_mass_matrix(q, prm);
    CHECK(static_cast<double>(fabsq(a - b)) < 1e-30);
  }
}

TEST_CASE("double pendulum vector field is Hamiltonian") {
  const DoublePendulumParams prm{9.8, 1.0, 1.3, 0.7, 1.9};
  const ODESystem sys = make_double_pendulum(prm);
  const std::vector<double> y{0.3, 2.0, -1.0, 0.5};
  std::vector<double> dy(4);
  sys.rhs(y, dy);
  const auto q = as_quad(y);
  std::vector<Quad> dq(4);
  sys.rhs_quad(q, dq);
  const auto fd = hamiltonian_field([&](std::span<const Quad> v) { return dp_hamiltonian(v, prm); }, q, 2);
  for (std::size_t j = 0; j < 4; ++j) {
    CAPTURE(j);
    CHECK(static_cast<double>(fabsq(dq[j] - fd[j])) < 1e-15);
    CHECK(std::fabs(dy[j] - static_cast<double>(dq[j])) < 1e-14);
  }
}

TEST_CASE("N-body energy matches a direct extended-precision sum") {
  const Problem p = load_named_problem("oss");
  const std::size_t n = 6;
  const ValueTable table = read_value_table(data_directory() + "/oss.txt");
  const double G = parse_machine_number(table.at("G"));
  std::vector<double> mass;
  for (std::size_t i = 0; i < n; ++i) mass.push_back(parse_machine_number(table.at("m" + std::to_string(i))));
  const NBodyParams prm = NBodyParams::from_masses(G, mass);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const mpq_class e = mpq_class(G) * mpq_class(mass[i]) * mpq_class(mass[j]);
      CHECK(prm.gmm[i * n + j] == round_to_double(e));
    }
  }

  MpPrecisionGuard guard(200);
  const auto& y = p.y0.main;
  MpReal kinetic = 0.0, potential = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    MpReal p2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) p2 = p2 + MpReal(y[3 * n + 3 * i + k]) * MpReal(y[3 * n + 3 * i + k]);
    kinetic = kinetic + p2 / (MpReal(2.0) * MpReal(mass[i]));
    for (std::size_t j = 0; j < i; ++j) {
      MpReal r2 = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const MpReal d = MpReal(y[3 * i + k]) - MpReal(y[3 * j + k]);
        r2 = r2 + d * d;
      }
      potential = potential + MpReal(prm.gmm[i * n + j]) / xp::sqrt(r2);
    }
  }
  const Quad want = (kinetic - potential).to_quad();
  const Quad got = p.system.energy(as_quad(y));
  CHECK(static_cast<double>(fabsq((got - want) / want)) < 1e-30);
}

TEST_CASE("N-body vector field is Hamiltonian and conserves angular momentum") {
  const Problem p = load_named_problem("oss");
  const auto q = as_quad(p.y0.main);
  std::vector<Quad> dq(q.size());
  p.system.rhs_quad(q, dq);
  const auto fd = hamiltonian_field(p.system.energy, q, q.size() / 2);
  std::vector<Quad> diff(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) diff[j] = dq[j] - fd[j];
  CHECK(static_cast<double>(max_abs(diff) / max_abs(dq)) < 1e-12);

  std::vector<double> dd(q.size());
  p.system.rhs(p.y0.main, dd);
  for (std::size_t j = 0; j < q.size(); ++j) {
    CHECK(std::fabs(dd[j] - static_cast<double>(dq[j])) <= 1e-14 * static_cast<double>(max_abs(dq)));
  }

  // dL/dt = sum q x p' + q' x p.
  REQUIRE(p.system.quadratic_invariants.size() == 3);
  const std::size_t n = 6;
  std::array<Quad, 3> rate{0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const Quad* qq = &q[3 * i];
    const Quad* pp = &q[3 * n + 3 * i];
    const Quad* dqq = &dq[3 * i];
    const Quad* dpp = &dq[3 * n + 3 * i];
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t a = (k + 1) % 3, b = (k + 2) % 3;
      rate[k] += qq[a] * dpp[b] - qq[b] * dpp[a] + dqq[a] * pp[b] - dqq[b] * pp[a];
    }
  }
  for (Quad r : rate) CHECK(static_cast<double>(fabsq(r)) < 1e-28);
}

TEST_CASE("shipped problems load") {
  const Problem ncdp = load_named_problem("ncdp");
  CHECK(ncdp.system.dimension == 4);
  CHECK(ncdp.y0.main == std::vector<double>{1.1, -1.1, 2.7746, 2.7746});
  const Problem cdp = load_named_problem("cdp");
  CHECK(cdp.system.dimension == 4);
  const Problem oss = load_named_problem("oss");
  CHECK(oss.system.dimension == 36);
  CHECK(oss.system.position_dims == 18);
  CHECK_THROWS_AS(load_named_problem("nonexistent"), Error);
}

TEST_CASE("value tables reject malformed input") {
  CHECK_THROWS_AS(parse_value_table("g = 1\ng = 2\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_value_table("just words\n"), InvalidArgument);
  const ValueTable t = parse_value_table("# comment\n a = 1 # trailing\n\nb=2\n");
  CHECK(t.at("a") == "1");
  CHECK(t.at("b") == "2");
  CHECK_THROWS_AS(problem_from_table(parse_value_table("g = 9.8\n"), "dp"), Error);
}

TEST_CASE("coincident bodies are reported") {
  const NBodyParams prm = NBodyParams::from_masses(1.0, {1.0, 1.0});
  const ODESystem sys = make_nbody(prm);
  std::vector<double> y(12, 0.0), dy(12);
  CHECK_THROWS_AS(sys.rhs(y, dy), SingularConfiguration);
  CHECK_THROWS_AS(NBodyParams::from_masses(1.0, {1.0, 0.0}), InvalidArgument);
}
