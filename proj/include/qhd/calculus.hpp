#pragma once

// Per-particle differential operators on configuration space, the
// delta-function marginalization onto one particle's position space, and
// the position-space operators used on the reduced fields.

#include <span>

#include "qhd/lattice.hpp"
#include "qhd/spectral.hpp"

namespace qhd {

class GridCalculus {
 public:
  explicit GridCalculus(const ConfigurationGrid& grid);

  const ConfigurationGrid& grid() const noexcept { return grid_; }
  const SpectralCalculus& configuration() const noexcept { return config_; }
  const SpectralCalculus& position() const noexcept { return position_; }

  /// ν partials along the target particle's axes.
  VectorField gradient(std::span<const double> f, ParticleIndex target) const;
  ScalarField laplacian(std::span<const double> f, ParticleIndex target) const;
  ScalarField divergence(const VectorField& v, ParticleIndex target) const;

  /// ∫ dQ δ(q − q_keep) f(Q): sums every axis outside keep's block and
  /// multiplies by the eliminated cell volume.
  ScalarField reduce_to_position(std::span<const double> f, ParticleIndex keep) const;
  VectorField reduce_to_position(const VectorField& v, ParticleIndex keep) const;

  VectorField position_gradient(std::span<const double> f) const;
  ScalarField position_divergence(const VectorField& v) const;
  /// Component β of the result is Σ_α ∂_α T_{αβ}.
  VectorField position_divergence(const Tensor2Field& t) const;

 private:
  ConfigurationGrid grid_;
  SpectralCalculus config_;
  SpectralCalculus position_;
};

}  // namespace qhd
