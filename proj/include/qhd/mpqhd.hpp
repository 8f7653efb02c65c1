#pragma once

// Single-position-space hydrodynamic fields per particle sort and for the
// whole ensemble, obtained by marginalizing configuration-space integrands
// onto the first particle of each sort.
//
// Integrands are taken in forms that stay finite at nodes: the current
// J = (ħ/m) Im(Ψ*∇Ψ) rather than D·w, J⊗J/D and ∇D⊗∇D/D with the node mask
// zeroing the quotient, and D·∇V_qu expanded in derivatives of D.

#include <optional>
#include <string>
#include <vector>

#include "qhd/calculus.hpp"
#include "qhd/model.hpp"
#include "qhd/residual.hpp"
#include "qhd/snapshot.hpp"

namespace qhd {

struct MpqhdOptions {
  double node_fraction = 1e-10;     // configuration-space quotient mask
  double density_fraction = 1e-10;  // ε_ρ = density_fraction · max ρ
};

/// Fields shared by the per-sort sets and the totals. Velocity is zero under
/// density_mask.
struct HydroFields {
  double time = 0.0;
  ScalarField mass_density;
  VectorField mass_current;
  VectorField velocity;
  Mask density_mask;
  Tensor2Field flow;  // Π
  VectorField force;  // f
  Tensor2Field pressure_tensor;
};

struct MpqhdFieldSet : HydroFields {
  std::size_t sort = 0;
  ScalarField pressure;  // P_A
  Tensor2Field flow_classical;
  Tensor2Field flow_quantum;
  VectorField quantum_force;  // direct reduction of −D∇V_qu
};

struct MpqhdTotals : HydroFields {};

/// All marginal quantities of one snapshot.
class MpqhdAnalysis {
 public:
  MpqhdAnalysis(const GridCalculus& calculus, const Potential& potential, double hbar,
                const WavefunctionSnapshot& snapshot, MpqhdOptions options = {});

  ScalarField mass_density(std::size_t sort) const;
  VectorField mass_current(std::size_t sort);
  ScalarField scalar_pressure(std::size_t sort);
  Tensor2Field momentum_flow_classical(std::size_t sort);
  Tensor2Field momentum_flow_quantum(std::size_t sort);
  VectorField force_density(std::size_t sort) const;
  VectorField quantum_force_density(std::size_t sort);

  MpqhdFieldSet sort_fields(std::size_t sort);
  std::vector<MpqhdFieldSet> all_sorts();

  const Mask& node_mask() const noexcept { return node_mask_; }

 private:
  ParticleIndex keeper(std::size_t sort) const { return {sort, 0}; }
  double prefactor(std::size_t sort) const;  // N(A)
  const ComplexField& psi_partial(std::size_t axis);
  const ComplexField& density_partial(std::initializer_list<std::size_t> axes);

  const GridCalculus& calc_;
  const Potential& potential_;
  double hbar_;
  double time_;
  MpqhdOptions options_;
  ScalarField density_;
  Mask node_mask_;
  DerivativeJet psi_jet_;
  DerivativeJet density_jet_;
};

Mask density_mask(std::span<const double> rho, double fraction);
/// v = j/ρ off the mask, zero on it.
VectorField mean_velocity(const ScalarField& rho, const VectorField& j, const Mask& mask);
/// p = Π − ρ v⊗v; on the mask v = 0 and p = Π.
Tensor2Field pressure_tensor(const Tensor2Field& flow, const ScalarField& rho, const VectorField& j,
                             const Mask& mask);
/// j⊗j/ρ (= ρ v⊗v) off the mask, zero on it.
Tensor2Field convective_flux(const ScalarField& rho, const VectorField& j, const Mask& mask);

/// Componentwise sums over sorts; v and p recomputed from the sums.
MpqhdTotals totals(const std::vector<MpqhdFieldSet>& sorts, MpqhdOptions options = {});

Tensor2Field operator+(const Tensor2Field& a, const Tensor2Field& b);
VectorField operator+(const VectorField& a, const VectorField& b);

}  // namespace qhd
