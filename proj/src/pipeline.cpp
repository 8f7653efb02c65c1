#include "qhd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "qhd/error.hpp"
#include "qhd/propagator.hpp"
#include "qhd/states.hpp"

namespace qhd {

namespace {

double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

// max|a − b| / max|b|, absolute when b vanishes.
double relative_change(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  const double scale = max_abs(b);
  return scale > 0.0 ? diff / scale : diff;
}

double asymmetry(const Tensor2Field& t) {
  double worst = 0.0, scale = 0.0;
  for (const auto& e : t.entries) scale = std::max(scale, max_abs(e));
  for (std::size_t a = 0; a < t.dim; ++a)
    for (std::size_t b = a + 1; b < t.dim; ++b)
      for (std::size_t i = 0; i < t(a, b).size(); ++i)
        worst = std::max(worst, std::abs(t(a, b)[i] - t(b, a)[i]));
  return scale > 0.0 ? worst / scale : worst;
}

std::string particle_label(const ConfigurationGrid& grid, ParticleIndex p) {
  return grid.sort(p.sort).label + "[" + std::to_string(p.index) + "]";
}

// Keeps the worst value per (equation, sort) across time levels.
class WorstCase {
 public:
  WorstCase(const Scenario& s, std::string resolution, const Tolerances& tol)
      : scenario_(s.name), resolution_(std::move(resolution)), tol_(tol) {}

  void add(const std::string& equation, const std::string& sort, double time, double norm,
           double denominator = 0.0, double coverage = 100.0, std::vector<std::string> flags = {}) {
    ReportEntry e;
    e.scenario = scenario_;
    e.equation = equation;
    e.sort = sort;
    e.resolution = resolution_;
    e.time = time;
    e.norm = norm;
    e.denominator = denominator;
    e.coverage = coverage;
    e.flags = std::move(flags);
    e = judged(std::move(e), tol_);
    auto key = std::make_pair(equation, sort);
    auto it = worst_.find(key);
    if (it == worst_.end()) {
      worst_.emplace(key, std::move(e));
      return;
    }
    // NaN counts as worst so it cannot hide behind a finite value.
    const bool worse = std::isnan(e.norm) || (e.lower_bound ? e.norm < it->second.norm : e.norm > it->second.norm);
    if (worse && !std::isnan(it->second.norm)) it->second = std::move(e);
  }

  void add(const std::string& equation, const std::string& sort, double time, const Residual& r) {
    std::vector<std::string> flags;
    if (r.absolute) flags.push_back("absolute");
    if (r.coverage < 50.0) flags.push_back("low_coverage");
    add(equation, sort, time, r.norm, r.denominator, r.coverage, std::move(flags));
  }

  void flush(ResidualReport& report) {
    for (auto& [key, e] : worst_) report.add(std::move(e));
    worst_.clear();
  }

 private:
  std::string scenario_;
  std::string resolution_;
  const Tolerances& tol_;
  std::map<std::pair<std::string, std::string>, ReportEntry> worst_;
};

}  // namespace

Scenario with_overrides(Scenario s, std::optional<std::size_t> points, std::optional<double> dt) {
  if (points) {
    s.grid.points = *points;
    validate(s.grid);
  }
  if (dt) {
    if (!(*dt > 0.0)) throw Error("time step override must be positive");
    s.time.dt = *dt;
  }
  return s;
}

BohmOptions bohm_options(const Scenario& s) {
  BohmOptions o;
  o.node_fraction = s.node_threshold;
  return o;
}

MpqhdOptions mpqhd_options(const Scenario& s) {
  MpqhdOptions o;
  o.node_fraction = s.node_threshold;
  o.density_fraction = s.density_threshold;
  return o;
}

SnapshotSeries build_series(const Scenario& s) {
  return build_series(s, s.time.snapshot_spacing(), s.time.snapshot_count());
}

SnapshotSeries build_series(const Scenario& s, double spacing, std::size_t frames) {
  if (frames < 1 || !(spacing > 0.0)) throw Error("series needs a positive spacing and at least one frame");
  const Model model = s.model();
  if (s.time.method == TimeGrid::Method::exact) {
    if (!evolves_in_closed_form(s.state, model))
      throw Error("scenario '" + s.name + "' has no closed-form evolution");
    SnapshotSeries series(model.grid, model.hbar);
    for (std::size_t k = 0; k < frames; ++k)
      series.push_back(sample_state(s.state, model, s.time.t0 + static_cast<double>(k) * spacing));
    return series;
  }
  const auto every = static_cast<std::size_t>(std::max(1.0, std::round(spacing / std::min(s.time.dt, spacing))));
  const double dt = spacing / static_cast<double>(every);
  SplitOperatorPropagator prop(model);
  return prop.evolve(sample_state(s.state, model, s.time.t0), dt, (frames - 1) * every, every);
}

double quantum_potential_form_gap(const GridCalculus& calculus, double hbar, const ComplexField& psi,
                                  BohmOptions options) {
  BohmAnalysis a(calculus, hbar, psi, options);
  const auto vd = a.quantum_potential();
  const auto va = a.quantum_potential_amplitude_form();
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < vd.size(); ++i) {
    if (a.mask()[i]) continue;
    diff = std::max(diff, std::abs(vd[i] - va[i]));
    scale = std::max(scale, std::abs(va[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

BoostCheck boost_check(const GridCalculus& calculus, const Model& model, const WavefunctionSnapshot& snapshot,
                       std::size_t sort, int harmonic, MpqhdOptions options) {
  const auto& grid = calculus.grid();
  const std::size_t nu = grid.spatial_dim();
  const std::size_t first = grid.first_axis({sort, 0});
  const double k = 2.0 * std::numbers::pi * harmonic / grid.lattice().axis().length();
  WavefunctionSnapshot boosted = snapshot;
  const auto& lat = grid.lattice();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < lat.size(); ++i) {
    double phase = 0.0;
    for (std::size_t a = 0; a < nu; ++a) phase += k * lat.coordinate(i, first + a);
    boosted.psi[i] *= std::polar(1.0, phase);
  }
  MpqhdAnalysis base(calculus, model.potential, model.hbar, snapshot, options);
  MpqhdAnalysis moved(calculus, model.potential, model.hbar, boosted, options);
  const auto a = base.sort_fields(sort);
  const auto b = moved.sort_fields(sort);

  BoostCheck out;
  auto invariant = [&](std::span<const double> x, std::span<const double> y) {
    out.invariant_change = std::max(out.invariant_change, relative_change(y, x));
  };
  invariant(a.mass_density, b.mass_density);
  invariant(a.pressure, b.pressure);
  for (std::size_t e = 0; e < a.flow_quantum.entries.size(); ++e)
    invariant(a.flow_quantum.entries[e], b.flow_quantum.entries[e]);
  for (std::size_t c = 0; c < nu; ++c) invariant(a.force[c], b.force[c]);

  // j' = j + (ħk/m) ρ and Π_cl' = Π_cl + (ħk/m)(e⊗j + j⊗e) + (ħk/m)² ρ e⊗e, e = (1,..,1).
  const double u = model.hbar * k / grid.sort(sort).mass;
  const std::size_t n = a.mass_density.size();
  for (std::size_t c = 0; c < nu; ++c) {
    ScalarField expect(n);
    for (std::size_t i = 0; i < n; ++i) expect[i] = a.mass_current[c][i] + u * a.mass_density[i];
    out.shift_error = std::max(out.shift_error, relative_change(b.mass_current[c], expect));
  }
  // Π_cl drops configuration points under the node mask, so its shift is
  // built from j and ρ reduced over the same unmasked points.
  const auto& mask = base.node_mask();
  const double count = static_cast<double>(grid.sort(sort).count);
  DerivativeJet jet(calculus.configuration(), snapshot.psi);
  ScalarField integrand(lat.size());
  for (std::size_t q = 0; q < lat.size(); ++q)
    integrand[q] = mask[q] ? 0.0 : count * grid.sort(sort).mass * std::norm(snapshot.psi[q]);
  const auto rho_kept = calculus.reduce_to_position(integrand, {sort, 0});
  std::vector<ScalarField> j_kept;
  for (std::size_t c = 0; c < nu; ++c) {
    const auto& d = jet.partial({first + c});
    for (std::size_t q = 0; q < lat.size(); ++q)
      integrand[q] = mask[q] ? 0.0 : count * model.hbar * (std::conj(snapshot.psi[q]) * d[q]).imag();
    j_kept.push_back(calculus.reduce_to_position(integrand, {sort, 0}));
  }
  for (std::size_t p = 0; p < nu; ++p)
    for (std::size_t q = 0; q < nu; ++q) {
      ScalarField expect(n);
      for (std::size_t i = 0; i < n; ++i)
        expect[i] = a.flow_classical(p, q)[i] + u * (j_kept[p][i] + j_kept[q][i]) + u * u * rho_kept[i];
      out.shift_error = std::max(out.shift_error, relative_change(b.flow_classical(p, q), expect));
    }
  return out;
}

std::string resolution_label(const Scenario& s) {
  std::ostringstream os;
  os << "n=" << s.grid.points << " dt=" << s.time.snapshot_spacing();
  return os.str();
}

void verify_series(const Scenario& s, const SnapshotSeries& series, const Tolerances& tol,
                   ResidualReport& report) {
  const Model model{series.grid(), s.potential, series.hbar()};
  const auto& grid = model.grid;
  const GridCalculus calc(grid);
  const auto bopt = bohm_options(s);
  const auto mopt = mpqhd_options(s);
  const double dq = grid.position_lattice().cell_volume();
  std::ostringstream res;
  res << "n=" << grid.lattice().points_per_axis() << " dt=" << series.time_step();
  WorstCase worst(s, res.str(), tol);

  for (std::size_t k = 1; k + 1 < series.size(); ++k) {
    const double t = series[k].time;
    worst.add("qpot_forms", "-", t, quantum_potential_form_gap(calc, model.hbar, series[k].psi, bopt));
    worst.add("bm_continuity", "-", t, bm_continuity_residual(calc, series, k, bopt));
    for (const auto& p : grid.particles())
      worst.add("eulerian_motion", particle_label(grid, p), t,
                eulerian_motion_residual(calc, series, model.potential, k, p, bopt));

    const auto slice = hydro_slice(calc, model, series, k, mopt);
    std::vector<Residual> continuity, ehrenfest;
    for (std::size_t a = 0; a < grid.sort_count(); ++a) {
      const auto& label = grid.sort(a).label;
      continuity.push_back(mpqhd_continuity_residual(calc, slice, a));
      ehrenfest.push_back(ehrenfest_residual(calc, slice, a));
      worst.add("mpqhd_continuity", label, t, continuity.back());
      worst.add("ehrenfest", label, t, ehrenfest.back());
      const auto cauchy = cauchy_residual(calc, slice, a);
      worst.add("cauchy", label, t, cauchy.residual);
      worst.add("cauchy_equivalence", label, t, cauchy.equivalence.norm, cauchy.equivalence.denominator,
                cauchy.equivalence.coverage);
      worst.add("force_identity", label, t, force_identity_residual(calc, slice.now[a]));

      const auto& f = slice.now[a];
      const double expected = static_cast<double>(grid.sort(a).count) * grid.sort(a).mass;
      worst.add("mass_sum_rule", label, t, std::abs(integrate(f.mass_density, dq) - expected) / expected);
      ScalarField absp(f.pressure.size());
      std::transform(f.pressure.begin(), f.pressure.end(), absp.begin(), [](double x) { return std::abs(x); });
      const double pscale = integrate(absp, dq);
      const double pint = std::abs(integrate(f.pressure, dq));
      worst.add("pressure_integral", label, t, pscale > 0.0 ? pint / pscale : pint);
      worst.add("tensor_symmetry", label, t,
                std::max({asymmetry(f.flow_classical), asymmetry(f.flow_quantum), asymmetry(f.pressure_tensor)}));
      const auto boost = boost_check(calc, model, series[k], a, 1, mopt);
      worst.add("boost_invariance", label, t, std::max(boost.invariant_change, boost.shift_error));
    }

    const auto total_c = mpqhd_continuity_residual(calc, slice, std::nullopt);
    const auto total_e = ehrenfest_residual(calc, slice, std::nullopt);
    worst.add("mpqhd_continuity", "total", t, total_c);
    worst.add("ehrenfest", "total", t, total_e);
    const auto total_cauchy = cauchy_residual(calc, slice, std::nullopt);
    worst.add("cauchy", "total", t, total_cauchy.residual);
    worst.add("cauchy_equivalence", "total", t, total_cauchy.equivalence.norm,
              total_cauchy.equivalence.denominator, total_cauchy.equivalence.coverage);
    worst.add("mpqhd_continuity_total_sum", "total", t, total_sum_gap(total_c, continuity, dq));
    worst.add("ehrenfest_total_sum", "total", t, total_sum_gap(total_e, ehrenfest, dq));
    double total_mass = 0.0;
    for (const auto& l : grid.sorts()) total_mass += static_cast<double>(l.count) * l.mass;
    worst.add("mass_sum_rule", "total", t,
              std::abs(integrate(slice.total_now.mass_density, dq) - total_mass) / total_mass);

    const auto demo = nonlinearity_demo(calc, slice);
    std::vector<std::string> flags;
    if (demo.inconclusive) flags.push_back("inconclusive");
    worst.add("nonsuperposition_cauchy", "total", t, demo.ratio, demo.cauchy_residual, 100.0, flags);
    worst.add("nonsuperposition_ehrenfest", "total", t, demo.ehrenfest_gap, 0.0, 100.0, flags);
  }
  worst.flush(report);
}

TrajectoryRun run_trajectories(const Scenario& s, std::uint64_t seed, const Tolerances& tol,
                               ResidualReport& report) {
  if (!s.trajectories) throw Error("scenario '" + s.name + "' defines no trajectory run");
  const auto& spec = *s.trajectories;
  const auto frames = static_cast<std::size_t>(std::llround((spec.until - s.time.t0) / spec.cadence)) + 1;
  TrajectoryRun run{build_series(s, spec.cadence, frames), {}, {}, true};
  const auto& grid = run.series.grid();
  const GridCalculus calc(grid);
  const auto seeds = sample_seeds(grid, density(run.series[0].psi), spec.count, seed);
  TrajectoryOptions opts;
  opts.bohm = bohm_options(s);
  run.bundle = integrate_trajectories(calc, run.series, seeds, opts);
  const std::size_t last = run.bundle.times.size() - 1;
  run.chi_square = density_chi_square(grid, density(run.series[last].psi), run.bundle, last, spec.cells_per_bin);

  WorstCase worst(s, resolution_label(s), tol);
  std::vector<std::string> flags;
  const auto flagged = static_cast<std::size_t>(
      std::count_if(run.bundle.flags.begin(), run.bundle.flags.end(), [](auto f) { return f != TrajectoryFlag::ok; }));
  if (flagged) flags.push_back("flagged_trajectories=" + std::to_string(flagged));
  worst.add("trajectory_chi_square", "-", run.bundle.times[last], run.chi_square.p_value,
            run.chi_square.statistic, 100.0, flags);
  if (grid.axis_count() == 1) {
    run.ordering = ordering_preserved(run.bundle);
    worst.add("trajectory_ordering", "-", run.bundle.times[last], run.ordering ? 0.0 : 1.0);
  }
  worst.flush(report);
  return run;
}

void run_convergence(const Scenario& s, const Tolerances& tol, ResidualReport& report) {
  if (!s.convergence) throw Error("scenario '" + s.name + "' defines no convergence study");
  const auto& spec = *s.convergence;
  const auto bopt = bohm_options(s);

  if (!spec.dt.empty()) {
    auto table = convergence_study(s.name, "bm_continuity", "dt", spec.dt, [&](double spacing) {
      const auto series = build_series(s, spacing, 3);
      const GridCalculus calc(series.grid());
      return ConvergenceRow{spacing, spacing, bm_continuity_residual(calc, series, 1, bopt).norm};
    });
    WorstCase worst(s, "n=" + std::to_string(s.grid.points) + " dt=study", tol);
    auto flags = table.flags;
    if (!table.order) flags.push_back("inconclusive");
    const double gap = table.order ? std::abs(*table.order - 2.0) : 0.0;
    worst.add("temporal_order", "-", s.time.t0 + spec.dt.back(), gap, 0.0, 100.0, flags);
    ResidualReport sub;
    worst.flush(sub);
    for (auto e : sub.entries()) {
      e.order = table.order;
      report.add(std::move(e));
    }
    report.add(table);
  }

  if (!spec.points.empty()) {
    const double spacing =
        (spec.dt.empty() ? s.time.snapshot_spacing() : *std::min_element(spec.dt.begin(), spec.dt.end())) / 10.0;
    std::vector<double> sizes(spec.points.begin(), spec.points.end());
    auto series_at = [&](double n) {
      return build_series(with_overrides(s, static_cast<std::size_t>(n), std::nullopt), spacing, 3);
    };
    report.add(convergence_study(s.name, "bm_continuity", "n", sizes, [&](double n) {
      const auto series = series_at(n);
      const GridCalculus calc(series.grid());
      return ConvergenceRow{n, series.grid().lattice().axis().spacing(),
                            bm_continuity_residual(calc, series, 1, bopt).norm};
    }));
    report.add(convergence_study(s.name, "force_identity", "n", sizes, [&](double n) {
      const auto series = series_at(n);
      const GridCalculus calc(series.grid());
      MpqhdAnalysis a(calc, s.potential, series.hbar(), series[1], mpqhd_options(s));
      return ConvergenceRow{n, series.grid().lattice().axis().spacing(),
                            force_identity_residual(calc, a.sort_fields(0)).norm};
    }));
  }
}

}  // namespace qhd
