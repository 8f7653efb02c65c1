#include "doctest.h"
#include "qhd/bohm.hpp"
#include "qhd/propagator.hpp"
#include "qhd/states.hpp"
#include "support.hpp"

using namespace qhd;

namespace {

SnapshotSeries exact_series(const StateSpec& spec, const Model& m, double t0, double dt, std::size_t frames) {
  SnapshotSeries s(m.grid, m.hbar);
  for (std::size_t k = 0; k < frames; ++k) s.push_back(sample_state(spec, m, t0 + k * dt));
  return s;
}

}  // namespace

TEST_CASE("real wavefunctions carry no current and plane waves flow uniformly") {
  const auto g = testing::line(128, 12.0, 2.0);
  GridCalculus calc(g);
  const auto m = testing::free_model(g, 1.5);
  const auto real = sample_state(testing::one(testing::gaussian(0.0, 1.0, 0.0)), m, 0.0);
  BohmAnalysis a(calc, 1.5, real.psi);
  const auto j = a.current({0, 0});
  for (double x : j[0]) CHECK(std::abs(x) < 1e-15);

  const double k = 2 * std::numbers::pi * 3 / 24.0;
  ComplexField wave(128);
  for (std::size_t i = 0; i < 128; ++i) wave[i] = std::polar(0.25, k * g.lattice().coordinate(i, 0));
  BohmAnalysis b(calc, 1.5, wave);
  const auto w = b.velocity({0, 0});
  const auto p = b.momentum({0, 0});
  const auto vq = b.quantum_potential();
  for (std::size_t i = 0; i < 128; ++i) {
    CHECK(w[0][i] == doctest::Approx(1.5 * k / 2.0).epsilon(1e-13));
    CHECK(p[0][i] == doctest::Approx(1.5 * k).epsilon(1e-13));
    CHECK(std::abs(vq[i]) < 1e-12);
  }
}

TEST_CASE("ground state: quantum potential cancels the trap") {
  const auto m = testing::trap_model(testing::line(128, 10.0, 1.3), {0.9}, 0.8);
  GridCalculus calc(m.grid);
  const auto psi = sample_state(testing::one(HarmonicEigenstate{{0}}), m, 0.0).psi;
  BohmAnalysis a(calc, m.hbar, psi);
  const auto vd = a.quantum_potential();
  const auto va = a.quantum_potential_amplitude_form();
  const auto vdens = quantum_potential_from_density(calc, m.hbar, a.density(), a.mask());
  const auto v = m.potential.evaluate(m.grid, 0.0);
  const double e = 0.5 * 0.8 * 0.9;
  const auto dvq = a.quantum_potential_derivative(0);
  const auto u = a.osmotic_velocity({0, 0});
  for (std::size_t i = 0; i < 128; ++i) {
    if (a.mask()[i]) {
      CHECK(std::isnan(vd[i]));
      continue;
    }
    const double x = m.grid.lattice().coordinate(i, 0);
    CHECK(vd[i] + v[i] == doctest::Approx(e).epsilon(1e-9).scale(1.0));
    CHECK(std::abs(vd[i] - va[i]) <= 1e-10 * std::max(1.0, std::abs(va[i])));
    CHECK(dvq[i] == doctest::Approx(-1.3 * 0.81 * x).epsilon(1e-8).scale(1.0));
    // u = −(ħ/2m)∂D/D = (ħ/m)(mω/ħ)x = ωx
    CHECK(u[0][i] == doctest::Approx(0.9 * x).epsilon(1e-9).scale(1.0));
    if (std::abs(x) < 3.0) CHECK(vdens[i] == doctest::Approx(vd[i]).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("continuity and eulerian residuals are small on exact evolution") {
  const auto m = testing::trap_model(testing::line(256, 16.0), {1.0});
  const auto spec = testing::one(CoherentState{{1.5}, {1.0}});
  GridCalculus calc(m.grid);
  const auto series = exact_series(spec, m, 0.0, 1e-3, 3);
  const auto c = bm_continuity_residual(calc, series, 1);
  CHECK(c.norm < 1e-5);
  CHECK_FALSE(c.absolute);
  CHECK(c.term("dD/dt") > 0.0);
  const auto e = eulerian_motion_residual(calc, series, m.potential, 1, {0, 0});
  CHECK(e.norm < 1e-4);
  CHECK_THROWS(bm_continuity_residual(calc, series, 0));
  CHECK_THROWS(bm_continuity_residual(calc, series, 2));

  // halving the snapshot spacing divides the residual by about four
  const auto fine = exact_series(spec, m, 0.0005, 5e-4, 3);
  const double ratio = c.norm / bm_continuity_residual(calc, fine, 1).norm;
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("stationary states have both sides of the eulerian equation at zero") {
  const auto m = testing::trap_model(testing::line(128, 10.0), {1.0});
  GridCalculus calc(m.grid);
  const auto series = exact_series(testing::one(HarmonicEigenstate{{0}}), m, 0.0, 1e-3, 3);
  const auto e = eulerian_motion_residual(calc, series, m.potential, 1, {0, 0});
  CHECK(e.term("m dw/dt") + e.term("m (w.grad)w") < 1e-8);
  CHECK(e.absolute_norm < 1e-8);
}

TEST_CASE("trajectories follow the analytic spreading law") {
  const auto m = testing::free_model(testing::line(256, 20.0));
  const double sigma0 = 1.0, k = 1.0, c0 = -1.0;
  const auto spec = testing::one(testing::gaussian(c0, sigma0, k));
  GridCalculus calc(m.grid);
  const auto series = exact_series(spec, m, 0.0, 0.01, 101);
  std::vector<std::vector<double>> seeds;
  for (double x : {-3.0, -1.5, -1.0, 0.2, 1.0}) seeds.push_back({x});
  const auto b = integrate_trajectories(calc, series, seeds);
  const double t = 1.0;
  const double sigma_t = sigma0 * std::sqrt(1 + std::pow(t / (2 * sigma0 * sigma0), 2));
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    CHECK(b.flags[i] == TrajectoryFlag::ok);
    const double expect = c0 + k * t + (seeds[i][0] - c0) * sigma_t / sigma0;
    CHECK(b.position(i, 100, 0) == doctest::Approx(expect).epsilon(1e-5).scale(1.0));
  }
  CHECK(ordering_preserved(b));
}

TEST_CASE("seeding is deterministic and reproduces the density") {
  const auto m = testing::free_model(testing::line(256, 20.0));
  const auto psi = sample_state(testing::one(testing::gaussian(0.0, 1.0, 0.0)), m, 0.0).psi;
  const auto d = density(psi);
  const auto s1 = sample_seeds(m.grid, d, 10000, 42);
  const auto s2 = sample_seeds(m.grid, d, 10000, 42);
  const auto s3 = sample_seeds(m.grid, d, 10000, 43);
  CHECK(s1 == s2);
  CHECK(s1 != s3);

  TrajectoryBundle b;
  b.axis_count = 1;
  b.times = {0.0};
  for (const auto& s : s1) b.positions.push_back(s);
  b.flags.assign(s1.size(), TrajectoryFlag::ok);
  b.flagged_at.assign(s1.size(), 1);
  const auto chi = density_chi_square(m.grid, d, b, 0, 4);
  CHECK(chi.bins > 5);
  CHECK(chi.p_value > 0.01);

  // a shifted sample must be rejected
  for (auto& p : b.positions) p[0] += 0.5;
  CHECK(density_chi_square(m.grid, d, b, 0, 4).p_value < 1e-6);
}

TEST_CASE("nodes are masked and flagged") {
  const auto m = testing::trap_model(testing::line(128, 10.0), {1.0});
  GridCalculus calc(m.grid);
  const auto psi = sample_state(testing::one(HarmonicEigenstate{{1}}), m, 0.0).psi;
  BohmAnalysis a(calc, 1.0, psi);
  // the node sits exactly on the grid point x = 0
  CHECK(a.mask()[64] == 1);
  const auto f = a.fields();
  CHECK(std::isnan(f.quantum_potential[64]));
  CHECK(std::isfinite(f.density[64]));
  CHECK(f.coverage < 100.0);
}
