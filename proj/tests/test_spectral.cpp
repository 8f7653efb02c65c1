#include "doctest.h"
#include "qhd/calculus.hpp"
#include "qhd/spectral.hpp"
#include "support.hpp"

using namespace qhd;

TEST_CASE("resolved Fourier modes are differentiated exactly") {
  Lattice lat(AxisSpec{0, 2 * std::numbers::pi, 32}, 1);
  SpectralCalculus sc(lat);
  ScalarField f(32);
  for (std::size_t i = 0; i < 32; ++i) f[i] = std::sin(3 * lat.coordinate(i, 0));
  const auto d1 = sc.derivative(std::span<const double>(f), 0, 1);
  const auto d3 = sc.derivative(std::span<const double>(f), 0, 3);
  for (std::size_t i = 0; i < 32; ++i) {
    const double x = lat.coordinate(i, 0);
    CHECK(d1[i] == doctest::Approx(3 * std::cos(3 * x)).epsilon(1e-12).scale(1.0));
    CHECK(d3[i] == doctest::Approx(-27 * std::cos(3 * x)).epsilon(1e-12).scale(27.0));
  }
}

TEST_CASE("nyquist mode is dropped by every derivative") {
  Lattice lat(AxisSpec{0, 1, 8}, 1);
  SpectralCalculus sc(lat);
  ScalarField f(8);
  for (std::size_t i = 0; i < 8; ++i) f[i] = i % 2 ? -1.0 : 1.0;
  for (unsigned order : {1u, 2u, 3u}) {
    const auto d = sc.derivative(std::span<const double>(f), 0, order);
    for (double x : d) CHECK(std::abs(x) < 1e-12);
  }
  CHECK(sc.wavenumbers()[4] == doctest::Approx(-std::numbers::pi / lat.axis().spacing()));
}

TEST_CASE("gaussian derivatives converge spectrally") {
  const auto g = testing::line(128, 12.0);
  SpectralCalculus sc(g.lattice());
  ScalarField f(128);
  for (std::size_t i = 0; i < 128; ++i) {
    const double x = g.lattice().coordinate(i, 0);
    f[i] = std::exp(-x * x / 2);
  }
  const auto d2 = sc.derivative(std::span<const double>(f), 0, 2);
  for (std::size_t i = 0; i < 128; ++i) {
    const double x = g.lattice().coordinate(i, 0);
    CHECK(std::abs(d2[i] - (x * x - 1) * f[i]) < 1e-12);
  }
}

TEST_CASE("div grad equals laplacian and mixed partials commute") {
  ConfigurationGrid g({{"A", 2, 1.0}}, 1, AxisSpec{-6, 6, 32});
  GridCalculus calc(g);
  const auto& lat = g.lattice();
  ScalarField f(lat.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = lat.coordinate(i, 0), y = lat.coordinate(i, 1);
    f[i] = std::exp(-(x * x + 2 * y * y + x * y) / 2) * (1 + 0.3 * x);
  }
  // all axes of both particles
  ScalarField lap(f.size(), 0.0), divgrad(f.size(), 0.0);
  for (auto p : g.particles()) {
    const auto l = calc.laplacian(f, p);
    const auto dg = calc.divergence(calc.gradient(f, p), p);
    for (std::size_t i = 0; i < f.size(); ++i) {
      lap[i] += l[i];
      divgrad[i] += dg[i];
    }
  }
  CHECK(testing::max_abs_diff(lap, divgrad) < 1e-12);

  ComplexField z(f.begin(), f.end());
  DerivativeJet jet(calc.configuration(), z);
  const auto a = jet.partial({0, 1});
  const auto b = jet.partial({1, 0});
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  CHECK(worst < 1e-13);
}

TEST_CASE("non-finite input is refused") {
  ScalarField f{1.0, NAN, 2.0};
  CHECK_THROWS(require_finite(std::span<const double>(f), "f"));
}
