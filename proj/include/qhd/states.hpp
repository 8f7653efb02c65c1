#pragma once

// Closed-form reference wavefunctions: initial conditions and exact oracles.

#include <optional>
#include <variant>
#include <vector>

#include "qhd/bohm.hpp"
#include "qhd/model.hpp"
#include "qhd/snapshot.hpp"

namespace qhd {

/// Freely spreading packet. `width` is the standard deviation of |ψ|² at t=0.
struct GaussianPacket {
  std::vector<double> center;
  double width = 1.0;
  std::vector<double> momentum;  // wavenumber k, so p = ħk
};

/// Product of 1D oscillator eigenfunctions, one quantum number per component.
struct HarmonicEigenstate {
  std::vector<unsigned> quanta;
};

/// Displaced ground state of the sort's trap; follows the classical orbit.
struct CoherentState {
  std::vector<double> displacement;  // x0 relative to the trap center
  std::vector<double> momentum;      // p0 (momentum, not wavenumber)
};

using ParticleState = std::variant<GaussianPacket, HarmonicEigenstate, CoherentState>;

enum class Exchange { none, symmetric, antisymmetric };

struct StateSpec {
  std::vector<ParticleState> particles;  // Q-order
  std::vector<Exchange> exchange;        // one per sort; empty means none
};

/// Throws qhd::Error if the state does not match the model (counts, vector
/// sizes, eigenstates without a trap).
void check_state(const StateSpec& spec, const Model& model);

/// True when sample_state solves the Schrödinger equation of `model` for all t.
bool evolves_in_closed_form(const StateSpec& spec, const Model& model);

/// Ψ(Q, t) from the closed forms, (anti)symmetrized and normalized on the
/// grid. Throws BoundaryLeakError if |Ψ| exceeds `edge_threshold` on the box
/// faces. Whether this is the exact evolution is a separate question, see
/// evolves_in_closed_form.
WavefunctionSnapshot sample_state(const StateSpec& spec, const Model& model, double t,
                                  double edge_threshold = 1e-12);

/// Closed-form Bohmian fields for product states of Gaussian-type factors
/// (free packets, coherent states, oscillator ground states). Everything
/// else throws NoClosedFormError.
BohmFieldSet exact_bohm_fields(const StateSpec& spec, const Model& model, double t,
                               double node_fraction = 1e-10);

}  // namespace qhd
