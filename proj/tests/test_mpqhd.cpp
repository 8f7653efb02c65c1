#include "doctest.h"
#include "qhd/mpqhd.hpp"
#include "qhd/pipeline.hpp"
#include "qhd/states.hpp"
#include "support.hpp"

using namespace qhd;

TEST_CASE("reduced density of a symmetrized pair matches direct quadrature") {
  ConfigurationGrid g({{"A", 2, 1.5}}, 1, AxisSpec{-12, 12, 64});
  HarmonicTrap h;
  h.omega = {1.0};
  Model m{g, Potential({h, SoftCoulombPair{}}), 1.0};
  StateSpec spec{{testing::gaussian(-1.5, 0.7, 0.5), testing::gaussian(1.5, 0.7, -0.5)}, {Exchange::symmetric}};
  const auto snap = sample_state(spec, m, 0.0);
  GridCalculus calc(g);
  MpqhdAnalysis a(calc, m.potential, 1.0, snap);
  const auto rho = a.mass_density(0);
  const auto j = a.mass_current(0);
  const double h1 = g.lattice().axis().spacing();
  double total = 0.0;
  for (std::size_t x = 0; x < 64; ++x) {
    double d = 0.0;
    for (std::size_t y = 0; y < 64; ++y) d += std::norm(snap.psi[x * 64 + y]);
    CHECK(rho[x] == doctest::Approx(2 * 1.5 * d * h1).epsilon(1e-12));
    total += rho[x] * h1;
  }
  CHECK(total == doctest::Approx(2 * 1.5).epsilon(1e-12));
  // symmetric packets with opposite momenta: the reduced current is odd
  for (std::size_t x = 1; x < 64; ++x) CHECK(j[0][x] == doctest::Approx(-j[0][64 - x]).epsilon(1e-10).scale(1e-3));
}

TEST_CASE("coherent state current is density times classical velocity") {
  const auto m = testing::trap_model(testing::line(256, 12.0, 2.0), {0.8});
  const auto spec = testing::one(CoherentState{{1.0}, {1.2}});
  const double t = 0.6;
  const auto snap = sample_state(spec, m, t);
  GridCalculus calc(m.grid);
  MpqhdAnalysis a(calc, m.potential, 1.0, snap);
  auto f = a.sort_fields(0);
  const double mw = 2.0 * 0.8;
  const double pc = 1.2 * std::cos(0.8 * t) - mw * 1.0 * std::sin(0.8 * t);
  for (std::size_t i = 0; i < 256; ++i) {
    CHECK(std::abs(f.mass_current[0][i] - f.mass_density[i] * pc / 2.0) < 1e-12);
    if (!f.density_mask[i]) CHECK(f.velocity[0][i] == doctest::Approx(pc / 2.0).epsilon(1e-8));
  }
  // ∫ ρ = N m
  CHECK(integrate(f.mass_density, m.grid.position_lattice().cell_volume()) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ground state pressure, forces and flow") {
  const auto m = testing::trap_model(testing::line(128, 10.0), {1.0});
  const auto snap = sample_state(testing::one(HarmonicEigenstate{{0}}), m, 0.0);
  GridCalculus calc(m.grid);
  MpqhdAnalysis a(calc, m.potential, 1.0, snap);
  const auto f = a.sort_fields(0);
  const auto d = density(snap.psi);
  const auto& lat = m.grid.lattice();
  // D'' = D(4x² − 2), P = −D''/4
  for (std::size_t i = 0; i < 128; ++i) {
    const double x = lat.coordinate(i, 0);
    CHECK(std::abs(f.pressure[i] + d[i] * (4 * x * x - 2) / 4) < 1e-12);
    CHECK(f.force[0][i] == doctest::Approx(-d[i] * x).epsilon(1e-12).scale(1e-14));
    CHECK(std::abs(f.force[0][i] + f.quantum_force[0][i]) < 1e-9);
    CHECK(std::abs(f.flow_classical(0, 0)[i]) < 1e-14);
  }
  CHECK(f.pressure[64] == doctest::Approx(d[64] / 2).epsilon(1e-12));
  CHECK(std::abs(integrate(f.pressure, lat.cell_volume())) < 1e-12);
}

TEST_CASE("plane wave momentum flow is purely classical") {
  const auto g = testing::line(64, 4.0, 2.0);
  const double k = 2 * std::numbers::pi * 2 / 8.0;
  ComplexField psi(64);
  for (std::size_t i = 0; i < 64; ++i) psi[i] = std::polar(std::sqrt(1.0 / 8.0), k * g.lattice().coordinate(i, 0));
  GridCalculus calc(g);
  Potential free;
  MpqhdAnalysis a(calc, free, 1.0, WavefunctionSnapshot{0.0, psi});
  const auto f = a.sort_fields(0);
  const double w = k / 2.0;
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(f.flow_classical(0, 0)[i] == doctest::Approx(f.mass_density[i] * w * w).epsilon(1e-12));
    CHECK(std::abs(f.flow_quantum(0, 0)[i]) < 1e-14);
    CHECK(std::abs(f.pressure_tensor(0, 0)[i]) < 1e-13);
  }
}

TEST_CASE("an external field acting on one sort leaves the other force-free") {
  ConfigurationGrid g({{"A", 1, 1.0}, {"B", 1, 2.0}}, 1, AxisSpec{-16, 16, 64});
  UniformField e;
  e.amplitude = {0.5};
  e.charge = {0.0, 1.0};
  Model m{g, Potential({e}), 1.0};
  StateSpec spec{{testing::gaussian(-1, 1, 0), testing::gaussian(1, 1, 0)}, {}};
  const auto snap = sample_state(spec, m, 0.0);
  GridCalculus calc(g);
  MpqhdAnalysis a(calc, m.potential, 1.0, snap);
  const auto fa = a.force_density(0);
  const auto fb = a.force_density(1);
  const auto rho_b = a.mass_density(1);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(fa[0][i] == 0.0);
    // number density of B times charge·E
    CHECK(fb[0][i] == doctest::Approx(rho_b[i] / 2.0 * 0.5).epsilon(1e-12));
  }
}

TEST_CASE("pressure tensor and velocity on the density mask") {
  ScalarField rho{1.0, 0.0, 2.0};
  VectorField j{{ScalarField{0.5, 0.0, 1.0}}};
  Tensor2Field flow{1, {ScalarField{3.0, 0.25, 4.0}}};
  const auto mask = density_mask(rho, 1e-10);
  CHECK(mask == Mask{0, 1, 0});
  const auto v = mean_velocity(rho, j, mask);
  CHECK(v[0] == ScalarField{0.5, 0.0, 0.5});
  const auto p = pressure_tensor(flow, rho, j, mask);
  CHECK(p(0, 0)[0] == doctest::Approx(2.75));
  CHECK(p(0, 0)[1] == 0.25);
  CHECK(p(0, 0)[2] == doctest::Approx(3.5));
}

TEST_CASE("totals are sums and boosts act as expected") {
  ConfigurationGrid g({{"A", 1, 1.0}, {"B", 1, 4.0}}, 1, AxisSpec{-10, 10, 128});
  HarmonicTrap h;
  h.omega = {1.0, 0.5};
  Model m{g, Potential({h}), 1.0};
  StateSpec spec{{CoherentState{{1.0}, {0.5}}, CoherentState{{-1.0}, {-1.0}}}, {}};
  const auto snap = sample_state(spec, m, 0.3);
  GridCalculus calc(g);
  MpqhdAnalysis a(calc, m.potential, 1.0, snap);
  const auto sorts = a.all_sorts();
  const auto tot = totals(sorts);
  for (std::size_t i = 0; i < 128; ++i) {
    CHECK(tot.mass_density[i] == sorts[0].mass_density[i] + sorts[1].mass_density[i]);
    CHECK(tot.flow(0, 0)[i] == sorts[0].flow(0, 0)[i] + sorts[1].flow(0, 0)[i]);
  }
  for (std::size_t s : {0u, 1u}) {
    const auto b = boost_check(calc, m, snap, s);
    CHECK(b.invariant_change < 1e-10);
    CHECK(b.shift_error < 1e-10);
  }
}
