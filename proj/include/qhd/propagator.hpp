#pragma once

// Strang split-operator integration of iħ∂_tΨ = HΨ on the periodic grid.

#include <functional>

#include "qhd/model.hpp"
#include "qhd/snapshot.hpp"
#include "qhd/spectral.hpp"

namespace qhd {

struct PropagatorOptions {
  /// Probability within `edge_margin` cells of any face that aborts a run.
  double leak_threshold = 1e-8;
  std::size_t edge_margin = 2;
};

class SplitOperatorPropagator {
 public:
  explicit SplitOperatorPropagator(const Model& model, PropagatorOptions options = {});

  const Model& model() const noexcept { return model_; }

  /// One step e^{-iVΔt/2ħ} e^{-iTΔt/ħ} e^{-iVΔt/2ħ}, V sampled at t + Δt/2.
  /// Throws BoundaryLeakError when probability reaches the box edge.
  WavefunctionSnapshot step(const WavefunctionSnapshot& psi, double dt) const;

  /// `steps` steps of size dt, keeping every `keep_every`-th state (the
  /// initial state is always kept).
  SnapshotSeries evolve(const WavefunctionSnapshot& initial, double dt, std::size_t steps,
                        std::size_t keep_every = 1) const;

  /// Probability within the configured margin of the box faces.
  double edge_probability(const ComplexField& psi) const;

 private:
  std::vector<std::vector<cplx>> kinetic_factors(double dt) const;

  Model model_;
  PropagatorOptions options_;
  SpectralCalculus spectral_;
  ScalarField static_potential_;
};

/// HΨ = Σ −ħ²/2m ΔΨ + VΨ with spectral Laplacians.
ComplexField apply_hamiltonian(const Model& model, const ComplexField& psi, double t);

}  // namespace qhd
