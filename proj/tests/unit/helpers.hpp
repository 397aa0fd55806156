#pragma once

#include <span>

#include "symirk/problems.hpp"

namespace symirk::testing {

// q' = w p, p' = -w q with energy (q^2 + p^2) / 2.
template <class Real>
void oscillator_rhs(double w, std::span<const Real> y, std::span<Real> dy) {
  const Real ww = xp::from_double<Real>(w);
  dy[0] = ww * y[1];
  dy[1] = -(ww * y[0]);
}

inline ODESystem oscillator(double w = 1.0) {
  ODESystem s;
  s.label = "oscillator";
  s.dimension = 2;
  s.position_dims = 1;
  s.rhs = [w](std::span<const double> y, std::span<double> dy) { oscillator_rhs<double>(w, y, dy); };
  s.rhs_quad = [w](std::span<const Quad> y, std::span<Quad> dy) { oscillator_rhs<Quad>(w, y, dy); };
  s.rhs_mp = [w](std::span<const MpReal> y, std::span<MpReal> dy) { oscillator_rhs<MpReal>(w, y, dy); };
  s.energy = [](std::span<const Quad> y) { return (y[0] * y[0] + y[1] * y[1]) / 2; };
  return s;
}

// q' = p, p' = 0.
inline ODESystem free_particle() {
  ODESystem s;
  s.label = "free";
  s.dimension = 2;
  s.position_dims = 1;
  s.rhs = [](std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = 0.0;
  };
  s.rhs_quad = [](std::span<const Quad> y, std::span<Quad> dy) {
    dy[0] = y[1];
    dy[1] = 0;
  };
  s.rhs_mp = [](std::span<const MpReal> y, std::span<MpReal> dy) {
    dy[0] = y[1];
    dy[1] = 0.0;
  };
  s.energy = [](std::span<const Quad> y) { return y[1] * y[1] / 2; };
  return s;
}

}  // namespace symirk::testing
