#include "qhd/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qhd/error.hpp"

namespace qhd {

namespace {

using std::numbers::pi;

struct Context {
  double mass;
  double hbar;
  double omega;   // 0 without a trap
  double center;  // trap center along this component
};

Context context_for(const Model& model, ParticleIndex p, std::size_t component) {
  Context c{model.grid.sort(p.sort).mass, model.hbar, 0.0, 0.0};
  if (const auto* h = model.potential.harmonic()) {
    c.omega = h->omega.at(p.sort);
    c.center = h->center.empty() ? 0.0 : h->center[component];
  }
  return c;
}

cplx gaussian_1d(const GaussianPacket& g, std::size_t c, const Context& ctx, double x, double t) {
  const double sigma2 = g.width * g.width;
  const double k = g.momentum[c];
  const double v = ctx.hbar * k / ctx.mass;
  const cplx s{1.0, ctx.hbar * t / (2.0 * ctx.mass * sigma2)};
  const double u = x - g.center[c] - v * t;
  const cplx exponent = -u * u / (4.0 * sigma2 * s) +
                        cplx{0.0, k * (x - g.center[c]) - ctx.hbar * k * k * t / (2.0 * ctx.mass)};
  return std::pow(2.0 * pi * sigma2, -0.25) / std::sqrt(s) * std::exp(exponent);
}

cplx eigen_1d(unsigned n, const Context& ctx, double x, double t) {
  const double alpha = ctx.mass * ctx.omega / ctx.hbar;
  const double xi = std::sqrt(alpha) * (x - ctx.center);
  const double norm = std::pow(alpha / pi, 0.25) /
                      std::sqrt(std::ldexp(std::tgamma(static_cast<double>(n) + 1.0), static_cast<int>(n)));
  const double amp = norm * std::hermite(n, xi) * std::exp(-0.5 * xi * xi);
  return std::polar(amp, -ctx.omega * (static_cast<double>(n) + 0.5) * t);
}

cplx coherent_1d(const CoherentState& s, std::size_t c, const Context& ctx, double x, double t) {
  const double mw = ctx.mass * ctx.omega;
  const double x0 = s.displacement[c];
  const double p0 = s.momentum[c];
  const double xc = x0 * std::cos(ctx.omega * t) + p0 / mw * std::sin(ctx.omega * t);
  const double pc = p0 * std::cos(ctx.omega * t) - mw * x0 * std::sin(ctx.omega * t);
  const double y = x - ctx.center;
  const double re = -mw * (y - xc) * (y - xc) / (2.0 * ctx.hbar);
  const double im = pc * (y - xc / 2.0) / ctx.hbar - ctx.omega * t / 2.0;
  return std::pow(mw / (pi * ctx.hbar), 0.25) * std::exp(cplx{re, im});
}

cplx orbital_1d(const ParticleState& state, std::size_t c, const Context& ctx, double x, double t) {
  if (const auto* g = std::get_if<GaussianPacket>(&state)) return gaussian_1d(*g, c, ctx, x, t);
  if (const auto* e = std::get_if<HarmonicEigenstate>(&state)) return eigen_1d(e->quanta[c], ctx, x, t);
  return coherent_1d(std::get<CoherentState>(state), c, ctx, x, t);
}

/// One particle's orbital on the ν-dimensional position lattice.
ComplexField orbital(const ParticleState& state, const Model& model, ParticleIndex p, double t) {
  const auto& lat = model.grid.position_lattice();
  ComplexField out(lat.size(), cplx{1.0, 0.0});
  for (std::size_t c = 0; c < lat.rank(); ++c) {
    const auto ctx = context_for(model, p, c);
    std::vector<cplx> line(lat.points_per_axis());
    for (std::size_t i = 0; i < line.size(); ++i)
      line[i] = orbital_1d(state, c, ctx, lat.axis().coordinate(i), t);
    for (std::size_t q = 0; q < out.size(); ++q) out[q] *= line[lat.index_along(q, c)];
  }
  return out;
}

int parity(const std::vector<std::size_t>& perm) {
  int sign = 1;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = perm[j]) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

/// Every combination of within-sort permutations, as an orbital assignment
/// (particle ordinal -> orbital ordinal) with its sign.
std::vector<std::pair<std::vector<std::size_t>, double>> assignments(const StateSpec& spec,
                                                                     const ConfigurationGrid& grid) {
  std::vector<std::pair<std::vector<std::size_t>, double>> out;
  std::vector<std::size_t> identity(grid.particle_count());
  std::iota(identity.begin(), identity.end(), 0);
  out.emplace_back(identity, 1.0);
  std::size_t offset = 0;
  for (std::size_t s = 0; s < grid.sort_count(); ++s) {
    const std::size_t count = grid.sort(s).count;
    const Exchange ex = spec.exchange.empty() ? Exchange::none : spec.exchange[s];
    if (ex != Exchange::none && count > 1) {
      std::vector<std::pair<std::vector<std::size_t>, double>> next;
      std::vector<std::size_t> perm(count);
      for (const auto& [base, sign] : out) {
        std::iota(perm.begin(), perm.end(), 0);
        do {
          auto a = base;
          for (std::size_t i = 0; i < count; ++i) a[offset + i] = base[offset + perm[i]];
          const double sg = ex == Exchange::antisymmetric ? parity(perm) : 1.0;
          next.emplace_back(std::move(a), sign * sg);
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
      out = std::move(next);
    }
    offset += count;
  }
  return out;
}

double max_edge_amplitude(const ConfigurationGrid& grid, const ComplexField& psi) {
  const auto& lat = grid.lattice();
  const std::size_t n = lat.points_per_axis();
  double worst = 0.0;
  for (std::size_t q = 0; q < psi.size(); ++q) {
    bool edge = false;
    for (std::size_t a = 0; a < lat.rank() && !edge; ++a) {
      const std::size_t i = lat.index_along(q, a);
      edge = i == 0 || i == n - 1;
    }
    if (edge) worst = std::max(worst, std::abs(psi[q]));
  }
  return worst;
}

// Centre, variance of |ψ|², flow velocity offset and velocity gradient of a
// Gaussian factor along one component.
struct GaussianMoments {
  double center;
  double variance;
  double drift;
  double stretch;
};

GaussianMoments moments(const ParticleState& state, std::size_t c, const Context& ctx, double t) {
  if (const auto* g = std::get_if<GaussianPacket>(&state)) {
    const double s02 = g->width * g->width;
    const double v = ctx.hbar * g->momentum[c] / ctx.mass;
    const double tau = ctx.hbar * t / (2.0 * ctx.mass * s02);
    const double stretch = ctx.hbar * ctx.hbar * t / (4.0 * ctx.mass * ctx.mass * s02 * s02 * (1.0 + tau * tau));
    return {g->center[c] + v * t, s02 * (1.0 + tau * tau), v, stretch};
  }
  const double var = ctx.hbar / (2.0 * ctx.mass * ctx.omega);
  if (std::holds_alternative<HarmonicEigenstate>(state)) return {ctx.center, var, 0.0, 0.0};
  const auto& s = std::get<CoherentState>(state);
  const double mw = ctx.mass * ctx.omega;
  const double xc = s.displacement[c] * std::cos(ctx.omega * t) + s.momentum[c] / mw * std::sin(ctx.omega * t);
  const double pc = s.momentum[c] * std::cos(ctx.omega * t) - mw * s.displacement[c] * std::sin(ctx.omega * t);
  return {ctx.center + xc, var, pc / ctx.mass, 0.0};
}

}  // namespace

void check_state(const StateSpec& spec, const Model& model) {
  const auto& grid = model.grid;
  const std::size_t nu = grid.spatial_dim();
  if (spec.particles.size() != grid.particle_count())
    throw Error("state lists " + std::to_string(spec.particles.size()) + " particles, model has " +
                std::to_string(grid.particle_count()));
  if (!spec.exchange.empty() && spec.exchange.size() != grid.sort_count())
    throw Error("exchange symmetry must be given once per sort");
  const auto particles = grid.particles();
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const auto& st = spec.particles[i];
    const std::string where = "particle " + std::to_string(i);
    if (const auto* g = std::get_if<GaussianPacket>(&st)) {
      if (g->center.size() != nu || g->momentum.size() != nu)
        throw Error(where + ": gaussian center/momentum need " + std::to_string(nu) + " components");
      if (!(g->width > 0.0)) throw Error(where + ": gaussian width must be positive");
    } else {
      const auto* h = model.potential.harmonic();
      if (!h) throw Error(where + ": oscillator states need exactly one harmonic trap");
      if (!(h->omega.at(particles[i].sort) > 0.0)) throw Error(where + ": trap frequency must be positive");
      if (const auto* e = std::get_if<HarmonicEigenstate>(&st)) {
        if (e->quanta.size() != nu) throw Error(where + ": eigenstate needs one quantum number per component");
      } else {
        const auto& c = std::get<CoherentState>(st);
        if (c.displacement.size() != nu || c.momentum.size() != nu)
          throw Error(where + ": coherent displacement/momentum need " + std::to_string(nu) + " components");
      }
    }
  }
}

bool evolves_in_closed_form(const StateSpec& spec, const Model& model) {
  if (model.potential.time_dependent()) return false;
  bool all_gaussian = true, all_trapped = true;
  for (const auto& st : spec.particles) {
    if (std::holds_alternative<GaussianPacket>(st)) all_trapped = false;
    else all_gaussian = false;
  }
  if (all_gaussian) return model.potential.is_free();
  if (!all_trapped) return false;
  // Oscillator states are exact only for a lone harmonic term.
  return model.potential.terms().size() == 1 && model.potential.harmonic() != nullptr;
}

WavefunctionSnapshot sample_state(const StateSpec& spec, const Model& model, double t,
                                  double edge_threshold) {
  check_state(spec, model);
  const auto& grid = model.grid;
  const auto particles = grid.particles();
  std::vector<ComplexField> orbitals;
  for (std::size_t i = 0; i < particles.size(); ++i)
    orbitals.push_back(orbital(spec.particles[i], model, particles[i], t));

  const auto terms = assignments(spec, grid);
  const std::size_t np = particles.size();
  const std::size_t block = grid.position_lattice().size();
  WavefunctionSnapshot snap{t, ComplexField(grid.size())};
#pragma omp parallel
  {
    std::vector<std::size_t> pos(np);
#pragma omp for schedule(static)
    for (std::size_t q = 0; q < snap.psi.size(); ++q) {
      std::size_t rest = q;
      for (std::size_t p = np; p-- > 0;) {
        pos[p] = rest % block;
        rest /= block;
      }
      cplx acc{0.0, 0.0};
      for (const auto& [assign, sign] : terms) {
        cplx prod{sign, 0.0};
        for (std::size_t p = 0; p < np; ++p) prod *= orbitals[assign[p]][pos[p]];
        acc += prod;
      }
      snap.psi[q] = acc;
    }
  }

  const double n2 = norm_squared(grid, snap.psi);
  if (!(n2 > 1e-200)) throw Error("state vanishes identically (antisymmetrized identical orbitals?)");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& z : snap.psi) z *= scale;

  const double edge = max_edge_amplitude(grid, snap.psi);
  if (edge > edge_threshold)
    throw BoundaryLeakError(t, edge,
                            "state amplitude " + std::to_string(edge) +
                                " at the box edge exceeds the threshold; enlarge the box");
  return snap;
}

BohmFieldSet exact_bohm_fields(const StateSpec& spec, const Model& model, double t,
                               double node_fraction) {
  check_state(spec, model);
  for (auto ex : spec.exchange)
    if (ex != Exchange::none)
      for (std::size_t s = 0; s < model.grid.sort_count(); ++s)
        if (model.grid.sort(s).count > 1)
          throw NoClosedFormError("closed-form Bohmian fields exist only for product states");
  for (const auto& st : spec.particles)
    if (const auto* e = std::get_if<HarmonicEigenstate>(&st))
      for (unsigned n : e->quanta)
        if (n != 0) throw NoClosedFormError("closed-form Bohmian fields exist only for Gaussian factors");
  if (!evolves_in_closed_form(spec, model))
    throw NoClosedFormError("state does not evolve in closed form under this potential");

  const auto& grid = model.grid;
  const auto& lat = grid.lattice();
  const std::size_t d = grid.axis_count();
  const std::size_t size = grid.size();
  const double hbar = model.hbar;

  std::vector<GaussianMoments> mom(d);
  std::vector<double> mass(d);
  for (std::size_t a = 0; a < d; ++a) {
    const auto p = grid.particle_of_axis(a);
    const std::size_t c = a % grid.spatial_dim();
    const auto ctx = context_for(model, p, c);
    mom[a] = moments(spec.particles[grid.particle_ordinal(p)], c, ctx, t);
    mass[a] = ctx.mass;
  }

  BohmFieldSet f;
  f.time = t;
  f.density.assign(size, 1.0);
  f.quantum_potential.assign(size, 0.0);
  std::vector<ScalarField> w(d, ScalarField(size)), od(d, ScalarField(size));
  for (std::size_t q = 0; q < size; ++q) {
    for (std::size_t a = 0; a < d; ++a) {
      const double y = lat.coordinate(q, a) - mom[a].center;
      const double s2 = mom[a].variance;
      f.density[q] *= std::exp(-y * y / (2.0 * s2)) / std::sqrt(2.0 * pi * s2);
      w[a][q] = mom[a].drift + mom[a].stretch * y;
      od[a][q] = hbar * y / (2.0 * mass[a] * s2);
      f.quantum_potential[q] += hbar * hbar / (4.0 * mass[a] * s2) -
                                hbar * hbar * y * y / (8.0 * mass[a] * s2 * s2);
    }
  }

  f.node_mask = node_mask(f.density, node_fraction);
  f.coverage = coverage_percent(f.node_mask);
  const std::size_t nu = grid.spatial_dim();
  for (std::size_t p = 0; p < grid.particle_count(); ++p) {
    VectorField vel, cur, osm, pm;
    for (std::size_t c = 0; c < nu; ++c) {
      const std::size_t a = p * nu + c;
      ScalarField j(size), m(size);
      for (std::size_t q = 0; q < size; ++q) {
        j[q] = f.density[q] * w[a][q];
        m[q] = mass[a] * w[a][q];
      }
      vel.components.push_back(w[a]);
      osm.components.push_back(od[a]);
      cur.components.push_back(std::move(j));
      pm.components.push_back(std::move(m));
    }
    f.velocity.push_back(std::move(vel));
    f.current.push_back(std::move(cur));
    f.osmotic.push_back(std::move(osm));
    f.momentum.push_back(std::move(pm));
  }
  return f;
}

}  // namespace qhd
