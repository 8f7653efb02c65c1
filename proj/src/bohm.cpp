#include "qhd/bohm.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "qhd/error.hpp"

namespace qhd {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

ScalarField density(std::span<const cplx> psi) {
  ScalarField d(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) d[i] = std::norm(psi[i]);
  return d;
}

BohmAnalysis::BohmAnalysis(const GridCalculus& calculus, double hbar, std::span<const cplx> psi,
                           BohmOptions options)
    : calc_(calculus), hbar_(hbar), options_(options), jet_(calculus.configuration(), psi) {
  if (psi.size() != calculus.grid().size()) throw Error("snapshot size does not match grid");
  require_finite(psi, "wavefunction");
  density_ = qhd::density(psi);
  mask_ = node_mask(density_, options_.node_fraction);
}

bool BohmAnalysis::mask_warning() const noexcept {
  return 100.0 - coverage() > 100.0 * options_.mask_warning_fraction;
}

ScalarField BohmAnalysis::axis_velocity(std::size_t axis) {
  const auto& psi = jet_.value();
  const auto& dpsi = jet_.partial({axis});
  const double c = hbar_ / mass_of(axis);
  ScalarField w(psi.size());
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < psi.size(); ++q) w[q] = mask_[q] ? nan : c * (dpsi[q] / psi[q]).imag();
  return w;
}

VectorField BohmAnalysis::velocity(ParticleIndex target) {
  const std::size_t first = calc_.grid().first_axis(target);
  VectorField v;
  for (std::size_t c = 0; c < calc_.grid().spatial_dim(); ++c) v.components.push_back(axis_velocity(first + c));
  return v;
}

VectorField BohmAnalysis::current(ParticleIndex target) {
  const std::size_t first = calc_.grid().first_axis(target);
  const auto& psi = jet_.value();
  VectorField j;
  for (std::size_t c = 0; c < calc_.grid().spatial_dim(); ++c) {
    const auto& dpsi = jet_.partial({first + c});
    const double k = hbar_ / mass_of(first + c);
    ScalarField comp(psi.size());
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < psi.size(); ++q) comp[q] = k * (std::conj(psi[q]) * dpsi[q]).imag();
    j.components.push_back(std::move(comp));
  }
  return j;
}

VectorField BohmAnalysis::osmotic_velocity(ParticleIndex target) {
  const std::size_t first = calc_.grid().first_axis(target);
  const auto& psi = jet_.value();
  VectorField d;
  for (std::size_t c = 0; c < calc_.grid().spatial_dim(); ++c) {
    const auto& dpsi = jet_.partial({first + c});
    const double k = hbar_ / mass_of(first + c);
    ScalarField comp(psi.size());
    // −(ħ/2m)∇D/D with ∇D = 2 Re(Ψ*∇Ψ)
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < psi.size(); ++q)
      comp[q] = mask_[q] ? nan : -k * (std::conj(psi[q]) * dpsi[q]).real() / density_[q];
    d.components.push_back(std::move(comp));
  }
  return d;
}

VectorField BohmAnalysis::momentum(ParticleIndex target) {
  auto p = velocity(target);
  const double m = calc_.grid().sort(target.sort).mass;
  for (auto& comp : p.components)
    for (auto& x : comp) x *= m;
  return p;
}

ScalarField BohmAnalysis::velocity_derivative(std::size_t alpha, std::size_t b) {
  const auto& psi = jet_.value();
  const auto& da = jet_.partial({alpha});
  const auto& db = jet_.partial({b});
  const auto& dab = jet_.partial({alpha, b});
  const double c = hbar_ / mass_of(alpha);
  ScalarField out(psi.size());
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < psi.size(); ++q) {
    if (mask_[q]) {
      out[q] = nan;
      continue;
    }
    const cplx ua = da[q] / psi[q];
    const cplx ub = db[q] / psi[q];
    out[q] = c * (dab[q] / psi[q] - ua * ub).imag();
  }
  return out;
}

ScalarField BohmAnalysis::quantum_potential() {
  const auto& psi = jet_.value();
  ScalarField v(psi.size(), 0.0);
  for (std::size_t b = 0; b < calc_.grid().axis_count(); ++b) {
    const auto& d1 = jet_.partial({b});
    const auto& d2 = jet_.partial({b, b});
    const double k = -hbar_ * hbar_ / (4.0 * mass_of(b));
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < psi.size(); ++q) {
      if (mask_[q]) continue;
      const double D = density_[q];
      const double gD = 2.0 * (std::conj(psi[q]) * d1[q]).real();
      const double lD = 2.0 * (std::conj(psi[q]) * d2[q]).real() + 2.0 * std::norm(d1[q]);
      v[q] += k * (lD / D - gD * gD / (2.0 * D * D));
    }
  }
  for (std::size_t q = 0; q < v.size(); ++q)
    if (mask_[q]) v[q] = nan;
  return v;
}

ScalarField BohmAnalysis::quantum_potential_amplitude_form() {
  const auto& psi = jet_.value();
  ScalarField v(psi.size(), 0.0);
  for (std::size_t b = 0; b < calc_.grid().axis_count(); ++b) {
    const auto& d1 = jet_.partial({b});
    const auto& d2 = jet_.partial({b, b});
    const double k = -hbar_ * hbar_ / (2.0 * mass_of(b));
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < psi.size(); ++q) {
      if (mask_[q]) continue;
      const double u = (d1[q] / psi[q]).imag();
      v[q] += k * ((d2[q] / psi[q]).real() + u * u);
    }
  }
  for (std::size_t q = 0; q < v.size(); ++q)
    if (mask_[q]) v[q] = nan;
  return v;
}

ScalarField BohmAnalysis::quantum_potential_derivative(std::size_t alpha) {
  const auto& psi = jet_.value();
  const auto& da = jet_.partial({alpha});
  ScalarField g(psi.size(), 0.0);
  for (std::size_t b = 0; b < calc_.grid().axis_count(); ++b) {
    const auto& db = jet_.partial({b});
    const auto& dbb = jet_.partial({b, b});
    const auto& dab = jet_.partial({alpha, b});
    const auto& dabb = jet_.partial({alpha, b, b});
    const double k = -hbar_ * hbar_ / (2.0 * mass_of(b));
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < psi.size(); ++q) {
      if (mask_[q]) continue;
      const cplx ua = da[q] / psi[q];
      const cplx ub = db[q] / psi[q];
      const cplx lap = dbb[q] / psi[q];
      const double t1 = (dabb[q] / psi[q] - lap * ua).real();
      const double t2 = 2.0 * ub.imag() * (dab[q] / psi[q] - ub * ua).imag();
      g[q] += k * (t1 + t2);
    }
  }
  for (std::size_t q = 0; q < g.size(); ++q)
    if (mask_[q]) g[q] = nan;
  return g;
}

BohmFieldSet BohmAnalysis::fields() {
  BohmFieldSet f;
  f.density = density_;
  for (const auto& p : calc_.grid().particles()) {
    f.velocity.push_back(velocity(p));
    f.current.push_back(current(p));
    f.osmotic.push_back(osmotic_velocity(p));
    f.momentum.push_back(momentum(p));
  }
  f.quantum_potential = quantum_potential();
  f.node_mask = mask_;
  f.coverage = coverage();
  return f;
}

ScalarField quantum_potential_from_density(const GridCalculus& calculus, double hbar,
                                           std::span<const double> density, const Mask& mask) {
  const auto& spec = calculus.configuration();
  const auto spectrum = spec.forward(density);
  const std::size_t d = calculus.grid().axis_count();
  ScalarField v(density.size(), 0.0);
  std::vector<unsigned> orders(d, 0);
  for (std::size_t b = 0; b < d; ++b) {
    orders.assign(d, 0);
    orders[b] = 1;
    const auto g = spec.derivative_from_spectrum(spectrum, orders);
    orders[b] = 2;
    const auto l = spec.derivative_from_spectrum(spectrum, orders);
    const double k = -hbar * hbar / (4.0 * calculus.grid().axis_mass(b));
    for (std::size_t q = 0; q < v.size(); ++q) {
      const double D = density[q];
      v[q] += k * (l[q].real() / D - g[q].real() * g[q].real() / (2.0 * D * D));
    }
  }
  for (std::size_t q = 0; q < v.size(); ++q)
    if (mask[q]) v[q] = nan;
  return v;
}

Residual bm_continuity_residual(const GridCalculus& calculus, const SnapshotSeries& series,
                                std::size_t index, BohmOptions options) {
  series.require_interior(index);
  const double dt = series.time_step();
  const auto& grid = calculus.grid();
  const auto d_prev = density(series[index - 1].psi);
  const auto d_next = density(series[index + 1].psi);
  BohmAnalysis now(calculus, series.hbar(), series[index].psi, options);

  ScalarField dDdt(grid.size()), divj(grid.size(), 0.0);
  for (std::size_t q = 0; q < grid.size(); ++q) dDdt[q] = (d_next[q] - d_prev[q]) / (2.0 * dt);
  for (const auto& p : grid.particles()) {
    const auto div = calculus.divergence(now.current(p), p);
    for (std::size_t q = 0; q < grid.size(); ++q) divj[q] += div[q];
  }

  Residual r;
  r.mask = now.mask();
  ScalarField res(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) res[q] = r.mask[q] ? 0.0 : dDdt[q] + divj[q];
  r.components.push_back(std::move(res));
  const double dv = grid.lattice().cell_volume();
  r.terms = {{"dD/dt", l2_norm(dDdt, dv, r.mask)}, {"div J", l2_norm(divj, dv, r.mask)}};
  finalize(r, dv, l2_norm(now.density(), dv));
  return r;
}

Residual eulerian_motion_residual(const GridCalculus& calculus, const SnapshotSeries& series,
                                  const Potential& potential, std::size_t index,
                                  ParticleIndex target, BohmOptions options) {
  series.require_interior(index);
  const double dt = series.time_step();
  const auto& grid = calculus.grid();
  const std::size_t size = grid.size();
  const std::size_t d = grid.axis_count();
  const std::size_t first = grid.first_axis(target);
  const double m = grid.sort(target.sort).mass;
  const double t = series[index].time;

  BohmAnalysis prev(calculus, series.hbar(), series[index - 1].psi, options);
  BohmAnalysis next(calculus, series.hbar(), series[index + 1].psi, options);
  BohmAnalysis now(calculus, series.hbar(), series[index].psi, options);
  const Mask masks[] = {prev.mask(), now.mask(), next.mask()};

  Residual r;
  r.mask = merge_masks(masks);
  const auto grad_v = potential.gradient(grid, t, target);
  std::vector<ScalarField> w(d);
  for (std::size_t b = 0; b < d; ++b) w[b] = now.axis_velocity(b);

  VectorField acc, conv, gq;
  for (std::size_t c = 0; c < grid.spatial_dim(); ++c) {
    const std::size_t alpha = first + c;
    const auto wp = prev.axis_velocity(alpha);
    const auto wn = next.axis_velocity(alpha);
    ScalarField a(size), cv(size, 0.0);
    for (std::size_t q = 0; q < size; ++q) a[q] = m * (wn[q] - wp[q]) / (2.0 * dt);
    for (std::size_t b = 0; b < d; ++b) {
      const auto dw = now.velocity_derivative(alpha, b);
      for (std::size_t q = 0; q < size; ++q) cv[q] += m * w[b][q] * dw[q];
    }
    auto g = now.quantum_potential_derivative(alpha);
    ScalarField res(size);
    for (std::size_t q = 0; q < size; ++q) {
      if (r.mask[q]) {
        a[q] = cv[q] = g[q] = res[q] = 0.0;
        continue;
      }
      res[q] = a[q] + cv[q] + g[q] + grad_v[c][q];
    }
    r.components.push_back(std::move(res));
    acc.components.push_back(std::move(a));
    conv.components.push_back(std::move(cv));
    gq.components.push_back(std::move(g));
  }
  const double dv = grid.lattice().cell_volume();
  r.terms = {{"m dw/dt", l2_norm(acc, dv, r.mask)},
             {"m (w.grad)w", l2_norm(conv, dv, r.mask)},
             {"grad Vqu", l2_norm(gq, dv, r.mask)},
             {"grad V", l2_norm(grad_v, dv, r.mask)}};
  finalize(r, dv, l2_norm(now.density(), dv));
  return r;
}

// --- trajectories -------------------------------------------------------------

std::vector<std::vector<double>> sample_seeds(const ConfigurationGrid& grid,
                                              std::span<const double> density, std::size_t count,
                                              std::uint64_t seed) {
  if (density.size() != grid.size()) throw Error("seed density does not match grid");
  std::vector<double> cdf(density.size());
  double acc = 0.0;
  for (std::size_t q = 0; q < density.size(); ++q) {
    acc += std::max(density[q], 0.0);
    cdf[q] = acc;
  }
  if (!(acc > 0.0)) throw Error("cannot seed trajectories from a vanishing density");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& lat = grid.lattice();
  const double h = lat.axis().spacing();
  std::vector<std::vector<double>> seeds(count, std::vector<double>(grid.axis_count()));
  for (auto& s : seeds) {
    const double u = unit(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t q = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    for (std::size_t a = 0; a < s.size(); ++a) {
      double x = lat.coordinate(q, a) + (unit(rng) - 0.5) * h;
      if (x < lat.axis().min) x += lat.axis().length();
      s[a] = x;
    }
  }
  return seeds;
}

namespace {

/// Multilinear periodic interpolation of the axis velocities. Returns false
/// when a corner is masked (NaN).
bool interpolate(const Lattice& lat, const std::vector<ScalarField>& w, const double* x,
                 double* out) {
  const std::size_t d = lat.rank();
  const std::size_t n = lat.points_per_axis();
  const double h = lat.axis().spacing();
  std::vector<std::size_t> lo(d), hi(d);
  std::vector<double> frac(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double s = (x[a] - lat.axis().min) / h;
    const double f = std::floor(s);
    frac[a] = s - f;
    const auto i = static_cast<std::size_t>(static_cast<long long>(f) % static_cast<long long>(n));
    lo[a] = i;
    hi[a] = (i + 1) % n;
  }
  for (std::size_t a = 0; a < d; ++a) out[a] = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const bool up = (corner >> a) & 1U;
      weight *= up ? frac[a] : 1.0 - frac[a];
      flat += (up ? hi[a] : lo[a]) * lat.stride(a);
    }
    if (weight == 0.0) continue;
    for (std::size_t a = 0; a < d; ++a) {
      const double v = w[a][flat];
      if (std::isnan(v)) return false;
      out[a] += weight * v;
    }
  }
  return true;
}

bool inside(const Lattice& lat, const double* x) {
  for (std::size_t a = 0; a < lat.rank(); ++a)
    if (x[a] < lat.axis().min || x[a] >= lat.axis().max) return false;
  return true;
}

std::vector<ScalarField> velocity_frame(const GridCalculus& calculus, const SnapshotSeries& series,
                                        std::size_t k, const BohmOptions& options) {
  BohmAnalysis a(calculus, series.hbar(), series[k].psi, options);
  std::vector<ScalarField> w;
  for (std::size_t b = 0; b < calculus.grid().axis_count(); ++b) w.push_back(a.axis_velocity(b));
  return w;
}

}  // namespace

TrajectoryBundle integrate_trajectories(const GridCalculus& calculus, const SnapshotSeries& series,
                                        const std::vector<std::vector<double>>& seeds,
                                        TrajectoryOptions options) {
  if (series.empty()) throw Error("trajectory integration needs at least one snapshot");
  if (options.substeps == 0) throw Error("trajectory substeps must be positive");
  const auto& lat = calculus.grid().lattice();
  const std::size_t d = lat.rank();
  const std::size_t steps = series.size();

  TrajectoryBundle b;
  b.axis_count = d;
  for (const auto& f : series.frames()) b.times.push_back(f.time);
  b.positions.assign(seeds.size(), std::vector<double>(steps * d));
  b.weights.assign(seeds.size(), 1.0 / static_cast<double>(std::max<std::size_t>(seeds.size(), 1)));
  b.flags.assign(seeds.size(), TrajectoryFlag::ok);
  b.flagged_at.assign(seeds.size(), steps);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i].size() != d) throw Error("trajectory seed has the wrong dimension");
    std::copy(seeds[i].begin(), seeds[i].end(), b.positions[i].begin());
    if (!inside(lat, seeds[i].data())) {
      b.flags[i] = TrajectoryFlag::exited;
      b.flagged_at[i] = 0;
    }
  }
  if (steps == 1) return b;

  auto w0 = velocity_frame(calculus, series, 0, options.bohm);
  for (std::size_t k = 0; k + 1 < steps; ++k) {
    auto w1 = velocity_frame(calculus, series, k + 1, options.bohm);
    const double dt = (series[k + 1].time - series[k].time) / static_cast<double>(options.substeps);

#pragma omp parallel
    {
      std::vector<double> x(d), y(d), k1(d), k2(d), k3(d), k4(d), va(d), vb(d);
      // Velocity at fraction s of the interval, linear in time.
      auto eval = [&](const std::vector<double>& at, double s, std::vector<double>& out) {
        if (!inside(lat, at.data())) return TrajectoryFlag::exited;
        if (!interpolate(lat, w0, at.data(), va.data()) || !interpolate(lat, w1, at.data(), vb.data()))
          return TrajectoryFlag::node;
        for (std::size_t a = 0; a < d; ++a) out[a] = (1.0 - s) * va[a] + s * vb[a];
        return TrajectoryFlag::ok;
      };
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto& path = b.positions[i];
        std::copy_n(path.begin() + static_cast<std::ptrdiff_t>(k * d), d, x.begin());
        if (b.flags[i] == TrajectoryFlag::ok) {
          for (std::size_t sub = 0; sub < options.substeps; ++sub) {
            const double s0 = static_cast<double>(sub) / static_cast<double>(options.substeps);
            const double hs = 1.0 / static_cast<double>(options.substeps);
            auto flag = eval(x, s0, k1);
            for (std::size_t a = 0; a < d && flag == TrajectoryFlag::ok; ++a) y[a] = x[a] + 0.5 * dt * k1[a];
            if (flag == TrajectoryFlag::ok) flag = eval(y, s0 + 0.5 * hs, k2);
            for (std::size_t a = 0; a < d && flag == TrajectoryFlag::ok; ++a) y[a] = x[a] + 0.5 * dt * k2[a];
            if (flag == TrajectoryFlag::ok) flag = eval(y, s0 + 0.5 * hs, k3);
            for (std::size_t a = 0; a < d && flag == TrajectoryFlag::ok; ++a) y[a] = x[a] + dt * k3[a];
            if (flag == TrajectoryFlag::ok) flag = eval(y, s0 + hs, k4);
            if (flag != TrajectoryFlag::ok) {
              b.flags[i] = flag;
              b.flagged_at[i] = k + 1;
              break;
            }
            for (std::size_t a = 0; a < d; ++a) x[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
          }
          if (b.flags[i] == TrajectoryFlag::ok && !inside(lat, x.data())) {
            b.flags[i] = TrajectoryFlag::exited;
            b.flagged_at[i] = k + 1;
          }
          if (b.flags[i] != TrajectoryFlag::ok)
            std::copy_n(path.begin() + static_cast<std::ptrdiff_t>(k * d), d, x.begin());
        }
        std::copy(x.begin(), x.end(), path.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
      }
    }
    w0 = std::move(w1);
  }
  return b;
}

bool ordering_preserved(const TrajectoryBundle& bundle) {
  if (bundle.axis_count != 1) throw Error("ordering check applies to one-dimensional bundles only");
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < bundle.count(); ++i)
    if (bundle.flags[i] == TrajectoryFlag::ok) live.push_back(i);
  std::sort(live.begin(), live.end(), [&](std::size_t a, std::size_t b) {
    return bundle.position(a, 0, 0) < bundle.position(b, 0, 0);
  });
  for (std::size_t step = 1; step < bundle.times.size(); ++step)
    for (std::size_t r = 1; r < live.size(); ++r)
      if (bundle.position(live[r - 1], step, 0) > bundle.position(live[r], step, 0)) return false;
  return true;
}

ChiSquareResult density_chi_square(const ConfigurationGrid& grid, std::span<const double> density,
                                   const TrajectoryBundle& bundle, std::size_t step,
                                   std::size_t cells_per_bin) {
  if (cells_per_bin == 0) throw Error("cells_per_bin must be positive");
  const auto& lat = grid.lattice();
  const std::size_t n = lat.points_per_axis();
  const std::size_t d = lat.rank();
  const double h = lat.axis().spacing();
  auto bin_of_index = [&](std::size_t q) {
    std::size_t key = 0;
    for (std::size_t a = 0; a < d; ++a) key = key * n + lat.index_along(q, a) / cells_per_bin;
    return key;
  };

  std::map<std::size_t, double> expected;
  double total = 0.0;
  for (std::size_t q = 0; q < density.size(); ++q) {
    expected[bin_of_index(q)] += density[q];
    total += density[q];
  }
  std::map<std::size_t, double> observed;
  std::size_t samples = 0;
  for (std::size_t i = 0; i < bundle.count(); ++i) {
    if (bundle.flags[i] != TrajectoryFlag::ok) continue;
    std::size_t key = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const double s = (bundle.position(i, step, a) - lat.axis().min) / h;
      const auto idx = static_cast<std::size_t>(std::llround(s)) % n;
      key = key * n + idx / cells_per_bin;
    }
    observed[key] += 1.0;
    ++samples;
  }

  ChiSquareResult r;
  double pooled_e = 0.0, pooled_o = 0.0;
  for (const auto& [key, p] : expected) {
    const double e = p / total * static_cast<double>(samples);
    const double o = observed.count(key) ? observed[key] : 0.0;
    if (e < 5.0) {
      pooled_e += e;
      pooled_o += o;
      continue;
    }
    r.statistic += (o - e) * (o - e) / e;
    ++r.bins;
  }
  if (pooled_e >= 5.0) {
    r.statistic += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++r.bins;
  }
  if (r.bins < 2) throw Error("too few populated bins for a chi-square test");
  r.dof = r.bins - 1;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

}  // namespace qhd
