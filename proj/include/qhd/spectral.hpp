#pragma once

// Fourier differentiation on a periodic Lattice, backed by FFTW.

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "qhd/lattice.hpp"

namespace qhd {

using cplx = std::complex<double>;

class SpectralCalculus {
 public:
  explicit SpectralCalculus(const Lattice& lattice);

  const Lattice& lattice() const noexcept { return lattice_; }

  /// Angular wavenumbers in FFT order; the Nyquist entry is -π/Δq.
  const std::vector<double>& wavenumbers() const noexcept { return k_; }

  /// Unnormalized forward DFT over every axis.
  ComplexField forward(std::span<const cplx> f) const;
  ComplexField forward(std::span<const double> f) const;
  /// Inverse DFT including the 1/size factor, in place.
  void backward_in_place(ComplexField& spectrum) const;

  /// Applies Π_a (i k_a)^orders[a] to a copy of `spectrum` and transforms back.
  /// The Nyquist mode of every differentiated axis is discarded, so the
  /// operators are exact adjoints of each other and div∘grad equals the
  /// Laplacian to roundoff.
  ComplexField derivative_from_spectrum(const ComplexField& spectrum,
                                        std::span<const unsigned> orders) const;

  ComplexField derivative(std::span<const cplx> f, std::size_t axis, unsigned order = 1) const;
  ScalarField derivative(std::span<const double> f, std::size_t axis, unsigned order = 1) const;

  /// Per-axis multiplier (i k)^order with the Nyquist entry set to zero.
  std::vector<cplx> derivative_factor(unsigned order) const;

 private:
  Lattice lattice_;
  std::vector<double> k_;
};

/// Lazily computed mixed partials of one complex field, all sharing a single
/// forward transform. Not thread-safe; build one per thread.
class DerivativeJet {
 public:
  DerivativeJet(const SpectralCalculus& calculus, std::span<const cplx> f);

  const ComplexField& value() const noexcept { return value_; }
  /// Mixed partial ∂_{a1}∂_{a2}...; repeated axes raise the order.
  const ComplexField& partial(std::initializer_list<std::size_t> axes);
  const ComplexField& partial(std::span<const std::size_t> axes);

 private:
  const SpectralCalculus& calculus_;
  ComplexField value_;
  ComplexField spectrum_;
  std::map<std::vector<unsigned>, ComplexField> cache_;
};

/// Throws qhd::Error if any entry is NaN or infinite.
void require_finite(std::span<const double> f, const char* what);
void require_finite(std::span<const cplx> f, const char* what);

}  // namespace qhd
