#pragma once

// Benchmark Hamiltonian systems behind a uniform ODE interface.
//
// The machine right-hand side `rhs` is the computational substitute f~:
// binary64 in, binary64 out, binary64 arithmetic inside. The same formulas are
// also instantiated for Quad and MpReal so that reference runs can evaluate
// f exactly to working precision. Energies and invariants are always
// evaluated in Quad.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "symirk/compensated.hpp"
#include "symirk/xprec.hpp"

namespace symirk {

template <class Real>
using RhsFn = std::function<void(std::span<const Real>, std::span<Real>)>;

struct ScalarInvariant {
  std::string name;
  std::function<Quad(std::span<const Quad>)> value;
};

struct ODESystem {
  std::string label;
  std::size_t dimension = 0;
  // Leading components that are positions (q); the remainder are momenta.
  std::size_t position_dims = 0;
  RhsFn<double> rhs;
  RhsFn<Quad> rhs_quad;
  RhsFn<MpReal> rhs_mp;
  std::function<Quad(std::span<const Quad>)> energy;
  std::vector<ScalarInvariant> quadratic_invariants;
};

// Extended-precision value of a compensated state, main + residual.
std::vector<Quad> to_quad(const CompensatedVector& y);
Quad energy_of(const ODESystem& sys, const CompensatedVector& y);

template <class Real>
void evaluate_rhs(const ODESystem& sys, std::span<const Real> y, std::span<Real> dy);

// ---------------------------------------------------------------------------
// Planar double pendulum, state (phi, theta, p_phi, p_theta); theta is the
// angle of the second rod relative to the first.

struct DoublePendulumParams {
  double g = 9.8;
  double l1 = 1.0;
  double l2 = 1.0;
  double m1 = 1.0;
  double m2 = 1.0;
};

Quad dp_hamiltonian(std::span<const Quad> y, const DoublePendulumParams& prm);

template <class Real>
void dp_rhs(const DoublePendulumParams& prm, std::span<const Real> y, std::span<Real> dy);

ODESystem make_double_pendulum(const DoublePendulumParams& prm, std::string label = "double-pendulum");

// ---------------------------------------------------------------------------
// Gravitational N-body problem, state (q_0..q_{N-1}, p_0..p_{N-1}) with each
// q_i, p_i in R^3.

struct NBodyParams {
  std::size_t n_bodies = 0;
  double G = 0.0;
  std::vector<double> mass;
  // fl(G m_i m_j), row-major N x N, rounded once from the exact product.
  std::vector<double> gmm;
  // fl(G m_i).
  std::vector<double> gm;

  static NBodyParams from_masses(double G, std::vector<double> mass);
};

Quad oss_hamiltonian(std::span<const Quad> y, const NBodyParams& prm);

template <class Real>
void oss_rhs(const NBodyParams& prm, std::span<const Real> y, std::span<Real> dy);

std::array<Quad, 3> oss_angular_momentum(std::span<const Quad> y, std::size_t n_bodies);

ODESystem make_nbody(const NBodyParams& prm, std::string label = "outer-solar-system");

// ---------------------------------------------------------------------------
// Initial-condition files: plain text, one `name = decimal` pair per line,
// `#` starts a comment.

using ValueTable = std::map<std::string, std::string>;

ValueTable read_value_table(const std::string& path);
ValueTable parse_value_table(const std::string& text);

struct Problem {
  ODESystem system;
  CompensatedVector y0;
};

// Builds the system and initial state described by a value table. Double
// pendulum tables carry g, l1, l2, m1, m2, phi, theta, p_phi, p_theta;
// N-body tables carry G, bodies, m<i>, q<i>_{x,y,z}, v<i>_{x,y,z} with
// momenta p = m v formed in extended precision and rounded once.
Problem problem_from_table(const ValueTable& table, const std::string& label);

// Directory holding the shipped tables (ncdp.txt, cdp.txt, oss.txt). Taken
// from $SYMIRK_DATA_DIR when set, else the install-time default.
std::string data_directory();
Problem load_named_problem(const std::string& name);

}  // namespace symirk
