#include "doctest.h"
#include "qhd/bohm.hpp"
#include "qhd/error.hpp"
#include "qhd/propagator.hpp"
#include "qhd/states.hpp"
#include "support.hpp"

using namespace qhd;

namespace {

// ‖iħ ∂_tΨ − HΨ‖ / ‖HΨ‖ with a central difference in time
double schrodinger_defect(const StateSpec& spec, const Model& model, double t) {
  const double h = 1e-4;
  const auto up = sample_state(spec, model, t + h).psi;
  const auto dn = sample_state(spec, model, t - h).psi;
  const auto now = sample_state(spec, model, t).psi;
  const auto hpsi = apply_hamiltonian(model, now, t);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < now.size(); ++i) {
    const cplx lhs = cplx{0.0, model.hbar} * (up[i] - dn[i]) / (2 * h);
    num += std::norm(lhs - hpsi[i]);
    den += std::norm(hpsi[i]);
  }
  return std::sqrt(num / den);
}

double energy(const Model& model, const ComplexField& psi) {
  const auto hpsi = apply_hamiltonian(model, psi, 0.0);
  cplx e = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) e += std::conj(psi[i]) * hpsi[i];
  return e.real() * model.grid.lattice().cell_volume();
}

}  // namespace

TEST_CASE("closed forms solve the time-dependent equation") {
  SUBCASE("free gaussian") {
    const auto m = testing::free_model(testing::line(256, 20.0, 2.0), 0.7);
    CHECK(schrodinger_defect(testing::one(testing::gaussian(-1.0, 1.0, 1.5)), m, 0.3) < 1e-7);
  }
  SUBCASE("coherent state") {
    const auto m = testing::trap_model(testing::line(256, 12.0, 1.5), {1.3});
    CHECK(schrodinger_defect(testing::one(CoherentState{{1.0}, {0.8}}), m, 0.4) < 1e-7);
  }
  SUBCASE("excited eigenstate") {
    const auto m = testing::trap_model(testing::line(128, 10.0), {1.0});
    CHECK(schrodinger_defect(testing::one(HarmonicEigenstate{{3}}), m, 0.2) < 1e-7);
  }
}

TEST_CASE("eigenstate energies are (n + 1/2) hbar omega") {
  const auto m = testing::trap_model(testing::line(128, 10.0, 2.0), {0.8}, 1.1);
  for (unsigned n : {0u, 1u, 4u}) {
    const auto psi = sample_state(testing::one(HarmonicEigenstate{{n}}), m, 0.0).psi;
    CHECK(norm_squared(m.grid, psi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(energy(m, psi) == doctest::Approx((n + 0.5) * 1.1 * 0.8).epsilon(1e-10));
  }
}

TEST_CASE("exchange symmetry of two identical particles") {
  ConfigurationGrid g({{"A", 2, 1.0}}, 1, AxisSpec{-16, 16, 128});
  const auto m = testing::free_model(g);
  const std::size_t n = 128;
  for (auto [ex, sign] : {std::pair{Exchange::symmetric, 1.0}, std::pair{Exchange::antisymmetric, -1.0}}) {
    StateSpec spec{{testing::gaussian(-1.0, 0.8, 0.5), testing::gaussian(1.2, 1.0, -0.3)}, {ex}};
    const auto psi = sample_state(spec, m, 0.5).psi;
    CHECK(norm_squared(g, psi) == doctest::Approx(1.0).epsilon(1e-12));
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(psi[i * n + j] - sign * psi[j * n + i]));
    CHECK(worst < 1e-14);
  }
}

TEST_CASE("closed-form bohm fields match the numerical extraction") {
  const auto m = testing::trap_model(testing::line(256, 12.0), {1.0});
  const auto spec = testing::one(CoherentState{{1.5}, {1.0}});
  const auto exact = exact_bohm_fields(spec, m, 0.7);
  const auto snap = sample_state(spec, m, 0.7);
  GridCalculus calc(m.grid);
  BohmAnalysis a(calc, m.hbar, snap.psi);
  const auto w = a.velocity({0, 0});
  const auto u = a.osmotic_velocity({0, 0});
  const auto vq = a.quantum_potential();
  double ew = 0.0, eu = 0.0, ev = 0.0;
  for (std::size_t i = 0; i < w[0].size(); ++i) {
    if (a.mask()[i] || exact.node_mask[i]) continue;
    ew = std::max(ew, std::abs(w[0][i] - exact.velocity[0][0][i]));
    eu = std::max(eu, std::abs(u[0][i] - exact.osmotic[0][0][i]));
    ev = std::max(ev, std::abs(vq[i] - exact.quantum_potential[i]));
  }
  CHECK(ew < 1e-8);
  CHECK(eu < 1e-8);
  CHECK(ev < 1e-8);
  // displaced ground state: V_qu = ħω/2 − ½mω²(x − x_c(t))²
  const double xc = 1.5 * std::cos(0.7) + std::sin(0.7);
  for (std::size_t i : {100u, 128u, 140u}) {
    const double y = m.grid.lattice().coordinate(i, 0) - xc;
    CHECK(exact.quantum_potential[i] == doctest::Approx(0.5 - 0.5 * y * y).epsilon(1e-12));
    CHECK(vq[i] == doctest::Approx(0.5 - 0.5 * y * y).epsilon(1e-9));
  }
}

TEST_CASE("state errors") {
  const auto m = testing::free_model(testing::line(64, 4.0));
  SUBCASE("eigenstate without a trap") {
    CHECK_THROWS_AS(check_state(testing::one(HarmonicEigenstate{{0}}), m), Error);
  }
  SUBCASE("wrong particle count") {
    CHECK_THROWS_AS(check_state(StateSpec{{testing::gaussian(0, 1, 0), testing::gaussian(0, 1, 0)}, {}}, m), Error);
  }
  SUBCASE("packet touching the box edge") {
    CHECK_THROWS_AS(sample_state(testing::one(testing::gaussian(3.0, 1.0, 0.0)), m, 0.0), BoundaryLeakError);
  }
  SUBCASE("no closed-form bohm fields for excited states") {
    const auto trap = testing::trap_model(testing::line(64, 8.0), {1.0});
    CHECK_THROWS_AS(exact_bohm_fields(testing::one(HarmonicEigenstate{{1}}), trap, 0.0), NoClosedFormError);
  }
  SUBCASE("interacting systems have no closed form") {
    ConfigurationGrid g({{"A", 2, 1.0}}, 1, AxisSpec{-8, 8, 32});
    HarmonicTrap h;
    h.omega = {1.0};
    Model inter{g, Potential({h, SoftCoulombPair{}}), 1.0};
    StateSpec spec{{testing::gaussian(-1, 1, 0), testing::gaussian(1, 1, 0)}, {}};
    CHECK_FALSE(evolves_in_closed_form(spec, inter));
    Model trap{g, Potential({h}), 1.0};
    CHECK_FALSE(evolves_in_closed_form(spec, trap));
    CHECK(evolves_in_closed_form(StateSpec{{CoherentState{{1}, {0}}, HarmonicEigenstate{{0}}}, {}}, trap));
  }
}
