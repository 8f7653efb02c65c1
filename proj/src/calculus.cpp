#include "qhd/calculus.hpp"

#include <cmath>

#include "qhd/error.hpp"
#include "qhd/kernels.hpp"

namespace qhd {

GridCalculus::GridCalculus(const ConfigurationGrid& grid)
    : grid_(grid), config_(grid.lattice()), position_(grid.position_lattice()) {}

VectorField GridCalculus::gradient(std::span<const double> f, ParticleIndex target) const {
  require_finite(f, "gradient input");
  const std::size_t first = grid_.first_axis(target);
  const auto spectrum = config_.forward(f);
  std::vector<unsigned> orders(grid_.axis_count(), 0);
  VectorField out;
  for (std::size_t c = 0; c < grid_.spatial_dim(); ++c) {
    orders.assign(grid_.axis_count(), 0);
    orders[first + c] = 1;
    auto z = config_.derivative_from_spectrum(spectrum, orders);
    ScalarField comp(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) comp[i] = z[i].real();
    out.components.push_back(std::move(comp));
  }
  return out;
}

ScalarField GridCalculus::laplacian(std::span<const double> f, ParticleIndex target) const {
  require_finite(f, "laplacian input");
  const std::size_t first = grid_.first_axis(target);
  const auto spectrum = config_.forward(f);
  ScalarField out(f.size(), 0.0);
  std::vector<unsigned> orders;
  for (std::size_t c = 0; c < grid_.spatial_dim(); ++c) {
    orders.assign(grid_.axis_count(), 0);
    orders[first + c] = 2;
    auto z = config_.derivative_from_spectrum(spectrum, orders);
    for (std::size_t i = 0; i < z.size(); ++i) out[i] += z[i].real();
  }
  return out;
}

ScalarField GridCalculus::divergence(const VectorField& v, ParticleIndex target) const {
  if (v.dim() != grid_.spatial_dim()) throw Error("divergence: vector field has wrong axis count");
  const std::size_t first = grid_.first_axis(target);
  ScalarField out(grid_.size(), 0.0);
  for (std::size_t c = 0; c < v.dim(); ++c) {
    require_finite(v[c], "divergence input");
    auto d = config_.derivative(std::span<const double>(v[c]), first + c, 1);
    for (std::size_t i = 0; i < d.size(); ++i) out[i] += d[i];
  }
  return out;
}

ScalarField GridCalculus::reduce_to_position(std::span<const double> f, ParticleIndex keep) const {
  if (f.size() != grid_.size()) throw Error("reduce_to_position: field size mismatch");
  const std::size_t n = grid_.lattice().points_per_axis();
  const std::size_t first = grid_.first_axis(keep);
  const std::size_t nu = grid_.spatial_dim();
  const std::size_t d = grid_.axis_count();
  const std::size_t outer = static_cast<std::size_t>(std::llround(std::pow(n, first)));
  const std::size_t kept = grid_.position_lattice().size();
  const std::size_t inner = static_cast<std::size_t>(std::llround(std::pow(n, d - first - nu)));
  const double scale = std::pow(grid_.lattice().axis().spacing(), static_cast<double>(d - nu));
  ScalarField out(kept, 0.0);
  kernels::parallel::reduce_middle(f, outer, kept, inner, scale, out);
  return out;
}

VectorField GridCalculus::reduce_to_position(const VectorField& v, ParticleIndex keep) const {
  VectorField out;
  for (const auto& c : v.components) out.components.push_back(reduce_to_position(c, keep));
  return out;
}

VectorField GridCalculus::position_gradient(std::span<const double> f) const {
  require_finite(f, "position gradient input");
  VectorField out;
  for (std::size_t a = 0; a < grid_.spatial_dim(); ++a) out.components.push_back(position_.derivative(f, a, 1));
  return out;
}

ScalarField GridCalculus::position_divergence(const VectorField& v) const {
  if (v.dim() != grid_.spatial_dim()) throw Error("position divergence: wrong component count");
  ScalarField out(grid_.position_lattice().size(), 0.0);
  for (std::size_t a = 0; a < v.dim(); ++a) {
    require_finite(v[a], "position divergence input");
    auto d = position_.derivative(std::span<const double>(v[a]), a, 1);
    for (std::size_t i = 0; i < d.size(); ++i) out[i] += d[i];
  }
  return out;
}

VectorField GridCalculus::position_divergence(const Tensor2Field& t) const {
  if (t.dim != grid_.spatial_dim()) throw Error("position divergence: wrong tensor rank");
  const std::size_t size = grid_.position_lattice().size();
  auto out = VectorField::zeros(t.dim, size);
  for (std::size_t a = 0; a < t.dim; ++a)
    for (std::size_t b = 0; b < t.dim; ++b) {
      require_finite(t(a, b), "tensor divergence input");
      auto d = position_.derivative(std::span<const double>(t(a, b)), a, 1);
      for (std::size_t i = 0; i < size; ++i) out[b][i] += d[i];
    }
  return out;
}

}  // namespace qhd
