#include "qhd/propagator.hpp"

#include <cmath>
#include <sstream>

#include "qhd/error.hpp"
#include "qhd/kernels.hpp"

namespace qhd {

SplitOperatorPropagator::SplitOperatorPropagator(const Model& model, PropagatorOptions options)
    : model_(model), options_(options), spectral_(model.grid.lattice()) {
  model_.potential.check(model_.grid);
  if (!model_.potential.time_dependent()) static_potential_ = model_.potential.evaluate(model_.grid, 0.0);
}

// Full k² including the Nyquist mode: the kinetic factor is a pure phase, so
// keeping it costs nothing in unitarity.
std::vector<std::vector<cplx>> SplitOperatorPropagator::kinetic_factors(double dt) const {
  const auto& k = spectral_.wavenumbers();
  const std::size_t d = model_.grid.axis_count();
  std::vector<std::vector<cplx>> out(d, std::vector<cplx>(k.size()));
  for (std::size_t a = 0; a < d; ++a) {
    const double m = model_.grid.axis_mass(a);
    for (std::size_t j = 0; j < k.size(); ++j)
      out[a][j] = std::polar(1.0, -model_.hbar * k[j] * k[j] * dt / (2.0 * m));
  }
  return out;
}

double SplitOperatorPropagator::edge_probability(const ComplexField& psi) const {
  const auto& lat = model_.grid.lattice();
  return kernels::parallel::edge_probability(psi, lat.points_per_axis(), lat.rank(), options_.edge_margin) *
         lat.cell_volume();
}

WavefunctionSnapshot SplitOperatorPropagator::step(const WavefunctionSnapshot& psi, double dt) const {
  if (!(dt > 0.0)) throw Error("time step must be positive");
  if (psi.psi.size() != model_.grid.size()) throw Error("snapshot does not match the model grid");
  const double half = dt / (2.0 * model_.hbar);
  const ScalarField* v = &static_potential_;
  ScalarField sampled;
  if (model_.potential.time_dependent()) {
    sampled = model_.potential.evaluate(model_.grid, psi.time + 0.5 * dt);
    v = &sampled;
  }

  WavefunctionSnapshot out{psi.time + dt, psi.psi};
  if (!model_.potential.is_free()) kernels::parallel::apply_phase(out.psi, *v, half);
  out.psi = spectral_.forward(out.psi);
  const auto kinetic = kinetic_factors(dt);
  std::vector<const cplx*> factors;
  for (const auto& f : kinetic) factors.push_back(f.data());
  kernels::parallel::multiply_separable(out.psi, model_.grid.lattice().points_per_axis(), factors);
  spectral_.backward_in_place(out.psi);
  if (!model_.potential.is_free()) kernels::parallel::apply_phase(out.psi, *v, half);

  const double leak = edge_probability(out.psi);
  if (leak > options_.leak_threshold) {
    std::ostringstream msg;
    msg << "probability " << leak << " within " << options_.edge_margin
        << " cells of the box edge at t=" << out.time << "; enlarge the box or shorten the run";
    throw BoundaryLeakError(out.time, leak, msg.str());
  }
  return out;
}

SnapshotSeries SplitOperatorPropagator::evolve(const WavefunctionSnapshot& initial, double dt,
                                               std::size_t steps, std::size_t keep_every) const {
  if (keep_every == 0) throw Error("snapshot cadence must be positive");
  SnapshotSeries series(model_.grid, model_.hbar);
  series.push_back(initial);
  WavefunctionSnapshot current = initial;
  for (std::size_t s = 1; s <= steps; ++s) {
    current = step(current, dt);
    // Pin the clock to the grid to avoid drift from repeated addition.
    current.time = initial.time + static_cast<double>(s) * dt;
    if (s % keep_every == 0) series.push_back(current);
  }
  return series;
}

ComplexField apply_hamiltonian(const Model& model, const ComplexField& psi, double t) {
  SpectralCalculus spectral(model.grid.lattice());
  const auto spectrum = spectral.forward(psi);
  const auto v = model.potential.evaluate(model.grid, t);
  ComplexField out(psi.size());
  for (std::size_t q = 0; q < psi.size(); ++q) out[q] = v[q] * psi[q];
  std::vector<unsigned> orders;
  for (std::size_t a = 0; a < model.grid.axis_count(); ++a) {
    orders.assign(model.grid.axis_count(), 0);
    orders[a] = 2;
    const auto lap = spectral.derivative_from_spectrum(spectrum, orders);
    const double c = -model.hbar * model.hbar / (2.0 * model.grid.axis_mass(a));
    for (std::size_t q = 0; q < psi.size(); ++q) out[q] += c * lap[q];
  }
  return out;
}

}  // namespace qhd
