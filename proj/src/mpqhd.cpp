#include "qhd/mpqhd.hpp"

#include <algorithm>
#include <cmath>

#include "qhd/bohm.hpp"
#include "qhd/error.hpp"

namespace qhd {

MpqhdAnalysis::MpqhdAnalysis(const GridCalculus& calculus, const Potential& potential, double hbar,
                             const WavefunctionSnapshot& snapshot, MpqhdOptions options)
    : calc_(calculus),
      potential_(potential),
      hbar_(hbar),
      time_(snapshot.time),
      options_(options),
      density_(density(snapshot.psi)),
      node_mask_(qhd::node_mask(density_, options.node_fraction)),
      psi_jet_(calculus.configuration(), snapshot.psi),
      density_jet_(calculus.configuration(),
                   ComplexField(density_.begin(), density_.end())) {
  require_finite(snapshot.psi, "wavefunction");
}

double MpqhdAnalysis::prefactor(std::size_t sort) const {
  return static_cast<double>(calc_.grid().sort(sort).count);
}

const ComplexField& MpqhdAnalysis::psi_partial(std::size_t axis) { return psi_jet_.partial({axis}); }

const ComplexField& MpqhdAnalysis::density_partial(std::initializer_list<std::size_t> axes) {
  return density_jet_.partial(axes);
}

ScalarField MpqhdAnalysis::mass_density(std::size_t sort) const {
  auto rho = calc_.reduce_to_position(density_, keeper(sort));
  const double c = prefactor(sort) * calc_.grid().sort(sort).mass;
  for (auto& x : rho) x *= c;
  return rho;
}

VectorField MpqhdAnalysis::mass_current(std::size_t sort) {
  const std::size_t first = calc_.grid().first_axis(keeper(sort));
  const auto& psi = psi_jet_.value();
  const double c = prefactor(sort) * hbar_;
  VectorField j;
  ScalarField integrand(psi.size());
  for (std::size_t k = 0; k < calc_.grid().spatial_dim(); ++k) {
    const auto& d = psi_partial(first + k);
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < psi.size(); ++q) integrand[q] = c * (std::conj(psi[q]) * d[q]).imag();
    j.components.push_back(calc_.reduce_to_position(integrand, keeper(sort)));
  }
  return j;
}

ScalarField MpqhdAnalysis::scalar_pressure(std::size_t sort) {
  const std::size_t first = calc_.grid().first_axis(keeper(sort));
  const double m = calc_.grid().sort(sort).mass;
  ScalarField lap(density_.size(), 0.0);
  for (std::size_t k = 0; k < calc_.grid().spatial_dim(); ++k) {
    const auto& d2 = density_partial({first + k, first + k});
    for (std::size_t q = 0; q < lap.size(); ++q) lap[q] += d2[q].real();
  }
  auto p = calc_.reduce_to_position(lap, keeper(sort));
  const double c = -prefactor(sort) * hbar_ * hbar_ / (4.0 * m);
  for (auto& x : p) x *= c;
  return p;
}

Tensor2Field MpqhdAnalysis::momentum_flow_classical(std::size_t sort) {
  const std::size_t first = calc_.grid().first_axis(keeper(sort));
  const std::size_t nu = calc_.grid().spatial_dim();
  const double m = calc_.grid().sort(sort).mass;
  const auto& psi = psi_jet_.value();
  // N m ∫δ J⊗J/D with J = (ħ/m) Im(Ψ*∇Ψ)
  const double c = prefactor(sort) * hbar_ * hbar_ / m;
  std::vector<ScalarField> im(nu, ScalarField(psi.size()));
  for (std::size_t k = 0; k < nu; ++k) {
    const auto& d = psi_partial(first + k);
    for (std::size_t q = 0; q < psi.size(); ++q) im[k][q] = (std::conj(psi[q]) * d[q]).imag();
  }
  Tensor2Field out{nu, std::vector<ScalarField>(nu * nu)};
  ScalarField integrand(psi.size());
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = a; b < nu; ++b) {
      for (std::size_t q = 0; q < psi.size(); ++q)
        integrand[q] = node_mask_[q] ? 0.0 : c * im[a][q] * im[b][q] / density_[q];
      out(a, b) = calc_.reduce_to_position(integrand, keeper(sort));
      if (b != a) out(b, a) = out(a, b);
    }
  return out;
}

Tensor2Field MpqhdAnalysis::momentum_flow_quantum(std::size_t sort) {
  const std::size_t first = calc_.grid().first_axis(keeper(sort));
  const std::size_t nu = calc_.grid().spatial_dim();
  const double m = calc_.grid().sort(sort).mass;
  const double c = prefactor(sort) * hbar_ * hbar_ / (4.0 * m);
  const auto pressure = scalar_pressure(sort);
  Tensor2Field out{nu, std::vector<ScalarField>(nu * nu)};
  ScalarField integrand(density_.size());
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = a; b < nu; ++b) {
      const auto& da = density_partial({first + a});
      const auto& db = density_partial({first + b});
      for (std::size_t q = 0; q < integrand.size(); ++q)
        integrand[q] = node_mask_[q] ? 0.0 : c * da[q].real() * db[q].real() / density_[q];
      out(a, b) = calc_.reduce_to_position(integrand, keeper(sort));
      if (a == b)
        for (std::size_t i = 0; i < pressure.size(); ++i) out(a, a)[i] += pressure[i];
      else
        out(b, a) = out(a, b);
    }
  return out;
}

VectorField MpqhdAnalysis::force_density(std::size_t sort) const {
  const auto grad = potential_.gradient(calc_.grid(), time_, keeper(sort));
  const double c = prefactor(sort);
  VectorField f;
  ScalarField integrand(density_.size());
  for (const auto& g : grad.components) {
    for (std::size_t q = 0; q < integrand.size(); ++q) integrand[q] = -c * density_[q] * g[q];
    f.components.push_back(calc_.reduce_to_position(integrand, keeper(sort)));
  }
  return f;
}

VectorField MpqhdAnalysis::quantum_force_density(std::size_t sort) {
  const std::size_t first = calc_.grid().first_axis(keeper(sort));
  const std::size_t d = calc_.grid().axis_count();
  const double c = prefactor(sort);
  VectorField f;
  for (std::size_t k = 0; k < calc_.grid().spatial_dim(); ++k) {
    const std::size_t alpha = first + k;
    const auto& da = density_partial({alpha});
    // D ∂_α V_qu = −Σ_b ħ²/4m_b [D_αbb − D_bb D_α/D − D_b D_αb/D + D_b² D_α/D²]
    ScalarField integrand(density_.size(), 0.0);
    for (std::size_t b = 0; b < d; ++b) {
      const auto& db = density_partial({b});
      const auto& dbb = density_partial({b, b});
      const auto& dab = density_partial({alpha, b});
      const auto& dabb = density_partial({alpha, b, b});
      const double k4 = hbar_ * hbar_ / (4.0 * calc_.grid().axis_mass(b));
#pragma omp parallel for schedule(static)
      for (std::size_t q = 0; q < integrand.size(); ++q) {
        if (node_mask_[q]) continue;
        const double D = density_[q];
        const double Da = da[q].real(), Db = db[q].real();
        const double bracket = dabb[q].real() - dbb[q].real() * Da / D - Db * dab[q].real() / D +
                               Db * Db * Da / (D * D);
        // −D∂V_qu = +Σ ħ²/4m [...]
        integrand[q] += c * k4 * bracket;
      }
    }
    f.components.push_back(calc_.reduce_to_position(integrand, keeper(sort)));
  }
  return f;
}

MpqhdFieldSet MpqhdAnalysis::sort_fields(std::size_t sort) {
  MpqhdFieldSet s;
  s.time = time_;
  s.sort = sort;
  s.mass_density = mass_density(sort);
  s.mass_current = mass_current(sort);
  s.density_mask = density_mask(s.mass_density, options_.density_fraction);
  s.velocity = mean_velocity(s.mass_density, s.mass_current, s.density_mask);
  s.pressure = scalar_pressure(sort);
  s.flow_classical = momentum_flow_classical(sort);
  s.flow_quantum = momentum_flow_quantum(sort);
  s.flow = s.flow_classical + s.flow_quantum;
  s.force = force_density(sort);
  s.quantum_force = quantum_force_density(sort);
  s.pressure_tensor = pressure_tensor(s.flow, s.mass_density, s.mass_current, s.density_mask);
  return s;
}

std::vector<MpqhdFieldSet> MpqhdAnalysis::all_sorts() {
  std::vector<MpqhdFieldSet> out;
  for (std::size_t s = 0; s < calc_.grid().sort_count(); ++s) out.push_back(sort_fields(s));
  return out;
}

Mask density_mask(std::span<const double> rho, double fraction) { return node_mask(rho, fraction); }

VectorField mean_velocity(const ScalarField& rho, const VectorField& j, const Mask& mask) {
  VectorField v = VectorField::zeros(j.dim(), rho.size());
  for (std::size_t c = 0; c < j.dim(); ++c)
    for (std::size_t i = 0; i < rho.size(); ++i) v[c][i] = mask[i] ? 0.0 : j[c][i] / rho[i];
  return v;
}

Tensor2Field convective_flux(const ScalarField& rho, const VectorField& j, const Mask& mask) {
  const std::size_t nu = j.dim();
  auto t = Tensor2Field::zeros(nu, rho.size());
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = 0; b < nu; ++b)
      for (std::size_t i = 0; i < rho.size(); ++i)
        t(a, b)[i] = mask[i] ? 0.0 : j[a][i] * j[b][i] / rho[i];
  return t;
}

Tensor2Field pressure_tensor(const Tensor2Field& flow, const ScalarField& rho, const VectorField& j,
                             const Mask& mask) {
  // v is zero on the mask, so p = Π there.
  auto p = convective_flux(rho, j, mask);
  for (std::size_t e = 0; e < p.entries.size(); ++e)
    for (std::size_t i = 0; i < rho.size(); ++i) p.entries[e][i] = flow.entries[e][i] - p.entries[e][i];
  return p;
}

Tensor2Field operator+(const Tensor2Field& a, const Tensor2Field& b) {
  if (a.dim != b.dim) throw Error("tensor rank mismatch");
  Tensor2Field out = a;
  for (std::size_t e = 0; e < out.entries.size(); ++e)
    for (std::size_t i = 0; i < out.entries[e].size(); ++i) out.entries[e][i] += b.entries[e][i];
  return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw Error("vector dimension mismatch");
  VectorField out = a;
  for (std::size_t c = 0; c < out.dim(); ++c)
    for (std::size_t i = 0; i < out[c].size(); ++i) out[c][i] += b[c][i];
  return out;
}

MpqhdTotals totals(const std::vector<MpqhdFieldSet>& sorts, MpqhdOptions options) {
  if (sorts.empty()) throw Error("totals need at least one sort");
  MpqhdTotals t;
  t.time = sorts[0].time;
  t.mass_density = sorts[0].mass_density;
  t.mass_current = sorts[0].mass_current;
  t.flow = sorts[0].flow;
  t.force = sorts[0].force;
  for (std::size_t s = 1; s < sorts.size(); ++s) {
    if (sorts[s].mass_density.size() != t.mass_density.size())
      throw Error("sorts live on different position grids");
    for (std::size_t i = 0; i < t.mass_density.size(); ++i) t.mass_density[i] += sorts[s].mass_density[i];
    t.mass_current = t.mass_current + sorts[s].mass_current;
    t.flow = t.flow + sorts[s].flow;
    t.force = t.force + sorts[s].force;
  }
  t.density_mask = density_mask(t.mass_density, options.density_fraction);
  t.velocity = mean_velocity(t.mass_density, t.mass_current, t.density_mask);
  t.pressure_tensor = pressure_tensor(t.flow, t.mass_density, t.mass_current, t.density_mask);
  return t;
}

}  // namespace qhd
