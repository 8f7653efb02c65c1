#pragma once

// Hamiltonian potentials with analytic gradients.
//
// Units are whatever the scenario uses consistently; with the defaults
// ħ = m = 1, energies are in ħω-like units and lengths in the grid's units.

#include <string>
#include <variant>
#include <vector>

#include "qhd/lattice.hpp"

namespace qhd {

/// ½ m_A ω_A² |q − center|² for every particle of every sort. One frequency
/// per sort keeps identical particles exchange-symmetric.
struct HarmonicTrap {
  std::vector<double> omega;   // one entry per sort
  std::vector<double> center;  // ν entries, empty means origin
};

/// strength / sqrt(|q − q'|² + softening²) summed over all particle pairs.
struct SoftCoulombPair {
  double strength = 1.0;
  double softening = 1.0;
};

struct FieldEnvelope {
  enum class Kind { constant, zero, sin2_pulse };
  Kind kind = Kind::constant;
  double duration = 0.0;  // sin2_pulse only
  double carrier = 0.0;   // angular frequency, sin2_pulse only

  double operator()(double t) const;
};

/// −Σ_p charge_A · E(t)·q_p, a uniform field in the dipole approximation.
struct UniformField {
  std::vector<double> amplitude;  // ν components of E
  std::vector<double> charge;     // one entry per sort
  FieldEnvelope envelope;
};

using PotentialTerm = std::variant<HarmonicTrap, SoftCoulombPair, UniformField>;

/// Sum of terms; an empty list is the free particle.
class Potential {
 public:
  Potential() = default;
  explicit Potential(std::vector<PotentialTerm> terms);

  const std::vector<PotentialTerm>& terms() const noexcept { return terms_; }
  bool is_free() const noexcept { return terms_.empty(); }
  bool time_dependent() const noexcept;
  /// The harmonic term, if exactly one is present.
  const HarmonicTrap* harmonic() const noexcept;

  /// Throws qhd::Error if the terms do not fit the grid (sizes, softening).
  void check(const ConfigurationGrid& grid) const;

  ScalarField evaluate(const ConfigurationGrid& grid, double t) const;
  VectorField gradient(const ConfigurationGrid& grid, double t, ParticleIndex target) const;

  /// Value and full configuration-space gradient at one point Q.
  double value_at(const ConfigurationGrid& grid, std::span<const double> q, double t) const;
  void gradient_at(const ConfigurationGrid& grid, std::span<const double> q, double t,
                   std::span<double> grad) const;

 private:
  std::vector<PotentialTerm> terms_;
};

std::string describe(const PotentialTerm& term);

/// Everything the Hamiltonian needs: grid with sort masses, potential, ħ.
struct Model {
  ConfigurationGrid grid;
  Potential potential;
  double hbar = 1.0;
};

}  // namespace qhd
