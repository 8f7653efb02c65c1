#include "doctest.h"
#include "json.hpp"
#include "qhd/error.hpp"
#include "qhd/states.hpp"
#include "qhd/verify.hpp"
#include "support.hpp"

using namespace qhd;

namespace {

SnapshotSeries exact_series(const StateSpec& spec, const Model& m, double t0, double dt) {
  SnapshotSeries s(m.grid, m.hbar);
  for (int k = 0; k < 3; ++k) s.push_back(sample_state(spec, m, t0 + k * dt));
  return s;
}

}  // namespace

TEST_CASE("fitted order recovers a synthetic power law") {
  std::vector<double> x{0.1, 0.05, 0.025, 0.0125}, y;
  for (double h : x) y.push_back(3.0 * h * h * h);
  CHECK(fitted_order(x, y) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(fitted_order({1.0}, {1.0}), Error);

  auto table = convergence_study("synthetic", "eq", "dt", {0.1, 0.05, 0.025},
                                 [](double dt) { return ConvergenceRow{dt, dt, 7.0 * dt * dt}; });
  REQUIRE(table.order);
  CHECK(*table.order == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(table.flags.empty());
  CHECK(table.rows.front().step == 0.1);
}

TEST_CASE("convergence flags") {
  auto floor = convergence_study("s", "eq", "n", {64, 128, 256}, [](double n) { return ConvergenceRow{n, 1 / n, 1e-15}; });
  CHECK(floor.flags == std::vector<std::string>{"at_floor"});
  CHECK_FALSE(floor.order);
  auto bumpy = convergence_study("s", "eq", "n", {64, 128, 256},
                                 [](double n) { return ConvergenceRow{n, 1 / n, n == 128 ? 1e-9 : 1e-6 / n}; });
  CHECK(bumpy.flags == std::vector<std::string>{"non_monotone"});
  CHECK_THROWS(convergence_study("s", "eq", "n", {64, 128}, [](double n) { return ConvergenceRow{n, 1 / n, 1.0}; }));
}

TEST_CASE("tolerances") {
  Tolerances t;
  CHECK(t.get("bm_continuity") == 1e-5);
  CHECK(t.is_lower_bound("nonsuperposition_cauchy"));
  CHECK_FALSE(t.is_lower_bound("cauchy"));
  const auto custom = Tolerances::from_json_text(R"({"cauchy": 0.5})");
  CHECK(custom.get("cauchy") == 0.5);
  CHECK(custom.get("ehrenfest") == 1e-4);
  try {
    Tolerances::from_json_text(R"({"cauchi": 0.5})");
    FAIL("unknown key accepted");
  } catch (const SchemaError& e) {
    CHECK(e.path() == "tolerances.cauchi");
  }
  CHECK_THROWS_AS(Tolerances::from_json_text(R"({"cauchy": -1})"), SchemaError);
  CHECK_THROWS_AS(Tolerances::from_json_text("[1]"), SchemaError);
}

TEST_CASE("judging entries") {
  Tolerances t;
  ReportEntry e{"s", "cauchy", "A", "n=8", 0.0, 5e-5};
  CHECK(judged(e, t).passed);
  e.norm = 2e-4;
  CHECK_FALSE(judged(e, t).passed);
  e.norm = NAN;
  CHECK_FALSE(judged(e, t).passed);
  ReportEntry lb{"s", "nonsuperposition_cauchy", "total", "n=8", 0.0, 12.0};
  CHECK(judged(lb, t).passed);
  CHECK(judged(lb, t).lower_bound);
  lb.norm = 3.0;
  CHECK_FALSE(judged(lb, t).passed);
  lb.flags = {"inconclusive"};
  CHECK(judged(lb, t).passed);
}

TEST_CASE("report ordering and serialization") {
  Tolerances t;
  ResidualReport r;
  r.add(judged(ReportEntry{"b", "ehrenfest", "A", "n=8", 0.1, 1e-6}, t));
  r.add(judged(ReportEntry{"a", "cauchy", "B", "n=8", 0.1, 1e-3}, t));
  r.add(judged(ReportEntry{"a", "cauchy", "A", "n=8", 0.1, 1e-6}, t));
  r.sort();
  CHECK(r.entries()[0].sort == "A");
  CHECK(r.entries()[1].sort == "B");
  CHECK(r.entries()[2].scenario == "b");
  CHECK_FALSE(r.all_passed());
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["entries"].size() == 3);
  CHECK(j["all_passed"] == false);
  CHECK(j["entries"][1]["passed"] == false);
  CHECK(r.to_text().find("FAIL") != std::string::npos);
}

TEST_CASE("residual normalization") {
  Residual r;
  r.components = {ScalarField{3.0, 4.0}};
  r.terms = {{"a", 10.0}, {"b", 20.0}};
  finalize(r, 1.0, 1.0);
  CHECK(r.absolute_norm == doctest::Approx(5.0));
  CHECK(r.denominator == 20.0);
  CHECK(r.norm == doctest::Approx(0.25));
  CHECK_FALSE(r.absolute);
  r.terms = {{"a", 1e-12}};
  finalize(r, 1.0, 1.0);
  CHECK(r.absolute);
  CHECK(r.norm == doctest::Approx(5.0));
}

TEST_CASE("coherent state: cauchy left side is the classical force") {
  const auto m = testing::trap_model(testing::line(256, 12.0), {1.0});
  const auto spec = testing::one(CoherentState{{1.5}, {1.0}});
  const auto series = exact_series(spec, m, 0.5, 1e-3);
  GridCalculus calc(m.grid);
  const auto slice = hydro_slice(calc, m, series, 1);
  const auto c = cauchy_residual(calc, slice, 0);
  const double xc = 1.5 * std::cos(slice.time) + std::sin(slice.time);
  const auto& rho = slice.now[0].mass_density;
  double peak = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double expect = -rho[i] * xc;
    peak = std::max(peak, std::abs(expect));
    worst = std::max(worst, std::abs(c.lhs[0][i] - expect));
  }
  CHECK(worst / peak < 1e-5);
  CHECK(c.residual.norm < 1e-4);
  CHECK(c.equivalence.norm < 1e-10);
  CHECK(mpqhd_continuity_residual(calc, slice, 0).norm < 1e-5);
  CHECK(ehrenfest_residual(calc, slice, 0).norm < 1e-4);
  CHECK(force_identity_residual(calc, slice.now[0]).norm < 1e-5);
}

TEST_CASE("a single sort makes the superposition demo inconclusive") {
  const auto m = testing::free_model(testing::line(128, 16.0));
  const auto series = exact_series(testing::one(testing::gaussian(0, 1, 1)), m, 0.0, 1e-3);
  GridCalculus calc(m.grid);
  const auto slice = hydro_slice(calc, m, series, 1);
  const auto r = nonlinearity_demo(calc, slice);
  CHECK(r.inconclusive);
  CHECK(r.cauchy_gap < 1e-12 * std::max(1.0, r.cauchy_residual) + 1e-14);
}
