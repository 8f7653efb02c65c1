#include "qhd/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <tuple>

#include "qhd/error.hpp"
#include "qhd/kernels.hpp"

namespace qhd {

namespace {

// FFTW's planner is not reentrant; executing an existing plan on new arrays
// is. Plans are created once per (rank, n, direction) and never destroyed.
std::mutex plan_mutex;
std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plan_cache;

fftw_plan plan_for(std::size_t rank, std::size_t n, int sign) {
  std::lock_guard lock(plan_mutex);
  auto key = std::make_tuple(rank, n, sign);
  if (auto it = plan_cache.find(key); it != plan_cache.end()) return it->second;
  std::vector<int> dims(rank, static_cast<int>(n));
  std::size_t size = 1;
  for (std::size_t a = 0; a < rank; ++a) size *= n;
  auto* buffer = fftw_alloc_complex(size);
  fftw_plan plan = fftw_plan_dft(static_cast<int>(rank), dims.data(), buffer, buffer, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buffer);
  if (!plan) throw Error("FFTW failed to create a plan");
  plan_cache.emplace(key, plan);
  return plan;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

SpectralCalculus::SpectralCalculus(const Lattice& lattice) : lattice_(lattice) {
  const std::size_t n = lattice_.points_per_axis();
  const double dk = 2.0 * std::numbers::pi / lattice_.axis().length();
  k_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto signed_j = j < n / 2 ? static_cast<double>(j)
                                    : static_cast<double>(j) - static_cast<double>(n);
    k_[j] = signed_j * dk;
  }
  plan_for(lattice_.rank(), n, FFTW_FORWARD);
  plan_for(lattice_.rank(), n, FFTW_BACKWARD);
}

ComplexField SpectralCalculus::forward(std::span<const cplx> f) const {
  if (f.size() != lattice_.size()) throw Error("field size does not match lattice");
  ComplexField out(f.begin(), f.end());
  fftw_execute_dft(plan_for(lattice_.rank(), lattice_.points_per_axis(), FFTW_FORWARD),
                   as_fftw(out.data()), as_fftw(out.data()));
  return out;
}

ComplexField SpectralCalculus::forward(std::span<const double> f) const {
  if (f.size() != lattice_.size()) throw Error("field size does not match lattice");
  ComplexField out(f.begin(), f.end());
  fftw_execute_dft(plan_for(lattice_.rank(), lattice_.points_per_axis(), FFTW_FORWARD),
                   as_fftw(out.data()), as_fftw(out.data()));
  return out;
}

void SpectralCalculus::backward_in_place(ComplexField& spectrum) const {
  fftw_execute_dft(plan_for(lattice_.rank(), lattice_.points_per_axis(), FFTW_BACKWARD),
                   as_fftw(spectrum.data()), as_fftw(spectrum.data()));
  const double inv = 1.0 / static_cast<double>(lattice_.size());
  for (auto& z : spectrum) z *= inv;
}

std::vector<cplx> SpectralCalculus::derivative_factor(unsigned order) const {
  std::vector<cplx> factor(k_.size());
  for (std::size_t j = 0; j < k_.size(); ++j) factor[j] = std::pow(cplx{0.0, k_[j]}, static_cast<int>(order));
  if (order > 0) factor[k_.size() / 2] = 0.0;
  return factor;
}

ComplexField SpectralCalculus::derivative_from_spectrum(const ComplexField& spectrum,
                                                        std::span<const unsigned> orders) const {
  if (orders.size() != lattice_.rank()) throw Error("derivative order list does not match rank");
  std::vector<std::vector<cplx>> store(lattice_.rank());
  std::vector<const cplx*> factors(lattice_.rank(), nullptr);
  for (std::size_t a = 0; a < lattice_.rank(); ++a) {
    if (orders[a] == 0) continue;
    store[a] = derivative_factor(orders[a]);
    factors[a] = store[a].data();
  }
  ComplexField out = spectrum;
  kernels::parallel::multiply_separable(out, lattice_.points_per_axis(), factors);
  backward_in_place(out);
  return out;
}

ComplexField SpectralCalculus::derivative(std::span<const cplx> f, std::size_t axis,
                                          unsigned order) const {
  std::vector<unsigned> orders(lattice_.rank(), 0);
  orders.at(axis) = order;
  return derivative_from_spectrum(forward(f), orders);
}

ScalarField SpectralCalculus::derivative(std::span<const double> f, std::size_t axis,
                                         unsigned order) const {
  std::vector<unsigned> orders(lattice_.rank(), 0);
  orders.at(axis) = order;
  auto z = derivative_from_spectrum(forward(f), orders);
  ScalarField out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
  return out;
}

DerivativeJet::DerivativeJet(const SpectralCalculus& calculus, std::span<const cplx> f)
    : calculus_(calculus), value_(f.begin(), f.end()), spectrum_(calculus.forward(f)) {}

const ComplexField& DerivativeJet::partial(std::initializer_list<std::size_t> axes) {
  return partial(std::span<const std::size_t>(axes.begin(), axes.size()));
}

const ComplexField& DerivativeJet::partial(std::span<const std::size_t> axes) {
  std::vector<unsigned> orders(calculus_.lattice().rank(), 0);
  for (auto a : axes) ++orders.at(a);
  auto it = cache_.find(orders);
  if (it == cache_.end()) {
    it = cache_.emplace(orders, calculus_.derivative_from_spectrum(spectrum_, orders)).first;
  }
  return it->second;
}

void require_finite(std::span<const double> f, const char* what) {
  for (double x : f)
    if (!std::isfinite(x)) throw Error(std::string(what) + " contains non-finite values");
}

void require_finite(std::span<const cplx> f, const char* what) {
  for (const auto& z : f)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(std::string(what) + " contains non-finite values");
}

}  // namespace qhd
