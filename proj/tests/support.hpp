#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "qhd/lattice.hpp"
#include "qhd/model.hpp"
#include "qhd/states.hpp"

namespace qhd::testing {

inline ConfigurationGrid line(std::size_t n, double half_width, double mass = 1.0) {
  return ConfigurationGrid({{"A", 1, mass}}, 1, AxisSpec{-half_width, half_width, n});
}

inline Model free_model(ConfigurationGrid grid, double hbar = 1.0) {
  return Model{std::move(grid), Potential{}, hbar};
}

inline Model trap_model(ConfigurationGrid grid, std::vector<double> omega, double hbar = 1.0) {
  HarmonicTrap h;
  h.omega = std::move(omega);
  return Model{std::move(grid), Potential({h}), hbar};
}

inline StateSpec one(ParticleState p) { return StateSpec{{std::move(p)}, {}}; }

inline GaussianPacket gaussian(double x0, double sigma, double k) { return GaussianPacket{{x0}, sigma, {k}}; }

inline std::vector<double> random_values(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace qhd::testing
