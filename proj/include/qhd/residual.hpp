#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qhd/lattice.hpp"

namespace qhd {

using Mask = std::vector<std::uint8_t>;  // 1 marks an excluded point

/// Residual of one balance equation at one time level.
struct Residual {
  std::vector<ScalarField> components;  // one per vector component, one for scalars
  Mask mask;                            // points excluded from every norm
  double absolute_norm = 0.0;
  double denominator = 0.0;
  /// absolute_norm / denominator, or absolute_norm itself when `absolute`.
  double norm = 0.0;
  /// The denominator fell below the floor and the absolute norm is reported.
  bool absolute = false;
  double coverage = 100.0;
  /// Norm of every term of the equation, by name.
  std::vector<std::pair<std::string, double>> terms;

  double term(const std::string& name) const;
};

/// Relative denominators below floor · reference_scale switch to absolute.
inline constexpr double absolute_fallback_floor = 1e-9;

/// Fills norm, denominator and the fallback flag. The denominator is the
/// largest term norm.
void finalize(Residual& r, double cell_volume, double reference_scale);

Mask node_mask(std::span<const double> density, double fraction);
Mask merge_masks(std::span<const Mask> masks);
double coverage_percent(const Mask& mask);

}  // namespace qhd
