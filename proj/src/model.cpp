#include "qhd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qhd/error.hpp"

namespace qhd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Per-axis lookup tables so the point loops avoid repeated particle_of_axis.
struct AxisInfo {
  std::vector<std::size_t> sort;
  std::vector<double> mass;
  std::vector<std::size_t> component;
};

AxisInfo axis_info(const ConfigurationGrid& grid) {
  AxisInfo info;
  for (std::size_t a = 0; a < grid.axis_count(); ++a) {
    const auto p = grid.particle_of_axis(a);
    info.sort.push_back(p.sort);
    info.mass.push_back(grid.sort(p.sort).mass);
    info.component.push_back(a % grid.spatial_dim());
  }
  return info;
}

double center_of(const HarmonicTrap& h, std::size_t c) {
  return h.center.empty() ? 0.0 : h.center[c];
}

void add_term_value(const PotentialTerm& term, const ConfigurationGrid& grid, const AxisInfo& info,
                    std::span<const double> q, double t, double& v) {
  const std::size_t nu = grid.spatial_dim();
  std::visit(overloaded{
                 [&](const HarmonicTrap& h) {
                   for (std::size_t a = 0; a < q.size(); ++a) {
                     const double w = h.omega[info.sort[a]];
                     const double x = q[a] - center_of(h, info.component[a]);
                     v += 0.5 * info.mass[a] * w * w * x * x;
                   }
                 },
                 [&](const SoftCoulombPair& c) {
                   const std::size_t np = grid.particle_count();
                   for (std::size_t i = 0; i < np; ++i)
                     for (std::size_t j = i + 1; j < np; ++j) {
                       double r2 = c.softening * c.softening;
                       for (std::size_t k = 0; k < nu; ++k) {
                         const double dx = q[i * nu + k] - q[j * nu + k];
                         r2 += dx * dx;
                       }
                       v += c.strength / std::sqrt(r2);
                     }
                 },
                 [&](const UniformField& f) {
                   const double g = f.envelope(t);
                   if (g == 0.0) return;
                   for (std::size_t a = 0; a < q.size(); ++a)
                     v -= f.charge[info.sort[a]] * g * f.amplitude[info.component[a]] * q[a];
                 },
             },
             term);
}

void add_term_gradient(const PotentialTerm& term, const ConfigurationGrid& grid,
                       const AxisInfo& info, std::span<const double> q, double t,
                       std::span<double> grad) {
  const std::size_t nu = grid.spatial_dim();
  std::visit(overloaded{
                 [&](const HarmonicTrap& h) {
                   for (std::size_t a = 0; a < q.size(); ++a) {
                     const double w = h.omega[info.sort[a]];
                     grad[a] += info.mass[a] * w * w * (q[a] - center_of(h, info.component[a]));
                   }
                 },
                 [&](const SoftCoulombPair& c) {
                   const std::size_t np = grid.particle_count();
                   for (std::size_t i = 0; i < np; ++i)
                     for (std::size_t j = i + 1; j < np; ++j) {
                       double r2 = c.softening * c.softening;
                       for (std::size_t k = 0; k < nu; ++k) {
                         const double dx = q[i * nu + k] - q[j * nu + k];
                         r2 += dx * dx;
                       }
                       const double s = -c.strength / (r2 * std::sqrt(r2));
                       for (std::size_t k = 0; k < nu; ++k) {
                         const double dx = q[i * nu + k] - q[j * nu + k];
                         grad[i * nu + k] += s * dx;
                         grad[j * nu + k] -= s * dx;
                       }
                     }
                 },
                 [&](const UniformField& f) {
                   const double g = f.envelope(t);
                   if (g == 0.0) return;
                   for (std::size_t a = 0; a < q.size(); ++a)
                     grad[a] -= f.charge[info.sort[a]] * g * f.amplitude[info.component[a]];
                 },
             },
             term);
}

}  // namespace

double FieldEnvelope::operator()(double t) const {
  switch (kind) {
    case Kind::constant:
      return 1.0;
    case Kind::zero:
      return 0.0;
    case Kind::sin2_pulse: {
      if (t < 0.0 || t > duration) return 0.0;
      const double s = std::sin(std::numbers::pi * t / duration);
      return s * s * std::cos(carrier * t);
    }
  }
  return 0.0;
}

Potential::Potential(std::vector<PotentialTerm> terms) : terms_(std::move(terms)) {
  for (const auto& term : terms_) {
    if (const auto* c = std::get_if<SoftCoulombPair>(&term)) {
      if (!(c->softening > 0.0)) throw Error("soft-Coulomb softening must be positive");
    }
    if (const auto* f = std::get_if<UniformField>(&term)) {
      if (f->envelope.kind == FieldEnvelope::Kind::sin2_pulse && !(f->envelope.duration > 0.0))
        throw Error("sin2 pulse duration must be positive");
    }
  }
}

bool Potential::time_dependent() const noexcept {
  for (const auto& term : terms_)
    if (const auto* f = std::get_if<UniformField>(&term))
      if (f->envelope.kind == FieldEnvelope::Kind::sin2_pulse) return true;
  return false;
}

const HarmonicTrap* Potential::harmonic() const noexcept {
  const HarmonicTrap* found = nullptr;
  for (const auto& term : terms_)
    if (const auto* h = std::get_if<HarmonicTrap>(&term)) {
      if (found) return nullptr;
      found = h;
    }
  return found;
}

void Potential::check(const ConfigurationGrid& grid) const {
  for (const auto& term : terms_) {
    if (const auto* h = std::get_if<HarmonicTrap>(&term)) {
      if (h->omega.size() != grid.sort_count())
        throw Error("harmonic trap needs one frequency per sort");
      if (!h->center.empty() && h->center.size() != grid.spatial_dim())
        throw Error("harmonic trap center must have one entry per spatial dimension");
    }
    if (const auto* f = std::get_if<UniformField>(&term)) {
      if (f->amplitude.size() != grid.spatial_dim())
        throw Error("uniform field amplitude must have one entry per spatial dimension");
      if (f->charge.size() != grid.sort_count())
        throw Error("uniform field needs one charge per sort");
    }
  }
}

double Potential::value_at(const ConfigurationGrid& grid, std::span<const double> q,
                           double t) const {
  const auto info = axis_info(grid);
  double v = 0.0;
  for (const auto& term : terms_) add_term_value(term, grid, info, q, t, v);
  return v;
}

void Potential::gradient_at(const ConfigurationGrid& grid, std::span<const double> q, double t,
                            std::span<double> grad) const {
  const auto info = axis_info(grid);
  std::fill(grad.begin(), grad.end(), 0.0);
  for (const auto& term : terms_) add_term_gradient(term, grid, info, q, t, grad);
}

ScalarField Potential::evaluate(const ConfigurationGrid& grid, double t) const {
  check(grid);
  const auto& lat = grid.lattice();
  const auto info = axis_info(grid);
  const std::size_t size = grid.size();
  const std::size_t d = grid.axis_count();
  ScalarField out(size, 0.0);
  if (terms_.empty()) return out;
#pragma omp parallel
  {
    std::vector<double> q(d);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t a = 0; a < d; ++a) q[a] = lat.coordinate(i, a);
      double v = 0.0;
      for (const auto& term : terms_) add_term_value(term, grid, info, q, t, v);
      out[i] = v;
    }
  }
  return out;
}

VectorField Potential::gradient(const ConfigurationGrid& grid, double t,
                                ParticleIndex target) const {
  check(grid);
  const auto& lat = grid.lattice();
  const auto info = axis_info(grid);
  const std::size_t size = grid.size();
  const std::size_t d = grid.axis_count();
  const std::size_t nu = grid.spatial_dim();
  const std::size_t first = grid.first_axis(target);
  auto out = VectorField::zeros(nu, size);
  if (terms_.empty()) return out;
#pragma omp parallel
  {
    std::vector<double> q(d), g(d);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t a = 0; a < d; ++a) q[a] = lat.coordinate(i, a);
      std::fill(g.begin(), g.end(), 0.0);
      for (const auto& term : terms_) add_term_gradient(term, grid, info, q, t, g);
      for (std::size_t c = 0; c < nu; ++c) out[c][i] = g[first + c];
    }
  }
  return out;
}

std::string describe(const PotentialTerm& term) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const HarmonicTrap& h) {
                   os << "harmonic(omega=";
                   for (std::size_t s = 0; s < h.omega.size(); ++s) os << (s ? "," : "") << h.omega[s];
                   os << ")";
                 },
                 [&](const SoftCoulombPair& c) {
                   os << "soft_coulomb(strength=" << c.strength << ", softening=" << c.softening << ")";
                 },
                 [&](const UniformField& f) {
                   os << "uniform_field(";
                   for (std::size_t k = 0; k < f.amplitude.size(); ++k) os << (k ? "," : "") << f.amplitude[k];
                   os << ")";
                 },
             },
             term);
  return os.str();
}

}  // namespace qhd
