#include <functional>

#include "doctest.h"
#include "json.hpp"
#include "qhd/error.hpp"
#include "qhd/scenario.hpp"

using namespace qhd;

namespace {

const char* minimal = R"({
  "name": "t",
  "sorts": [{"label": "A", "count": 1, "mass": 1.0}],
  "grid": {"min": -8.0, "max": 8.0, "points": 64},
  "potential": {"terms": []},
  "state": {"particles": [{"type": "gaussian", "center": [0.0], "width": 1.0, "momentum": [0.0]}]},
  "time": {"dt": 0.01, "steps": 4}
})";

std::string edited(const std::function<void(nlohmann::json&)>& f) {
  auto j = nlohmann::json::parse(minimal);
  f(j);
  return j.dump();
}

std::string schema_path(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal scenario and defaults") {
  const auto s = parse_scenario(minimal);
  CHECK(s.hbar == 1.0);
  CHECK(s.spatial_dim == 1);
  CHECK(s.time.method == TimeGrid::Method::propagate);
  CHECK(s.time.snapshot_count() == 5);
  CHECK_FALSE(s.trajectories);
  CHECK(s.configuration_grid().size() == 64);
}

TEST_CASE("every preset parses and round-trips") {
  REQUIRE(preset_names().size() >= 6);
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto s = preset(name);
    CHECK(s.name == name);
    const auto text = scenario_to_json(s);
    CHECK(scenario_to_json(parse_scenario(text)) == text);
  }
  CHECK(is_preset("coherent"));
  CHECK_FALSE(is_preset("nope"));
  CHECK_THROWS_AS(preset("nope"), Error);
}

TEST_CASE("schema errors name the offending field") {
  CHECK(schema_path(edited([](auto& j) { j["sorts"][0].erase("mass"); })) == "sorts[0].mass");
  CHECK(schema_path(edited([](auto& j) { j["sorts"][0]["mass"] = -2.0; })) == "sorts[0].mass");
  CHECK(schema_path(edited([](auto& j) { j["grid"]["pointz"] = 3; })) == "grid.pointz");
  CHECK(schema_path(edited([](auto& j) { j["grid"]["points"] = 100; })) != "");
  CHECK(schema_path(edited([](auto& j) { j["state"]["particles"][0]["type"] = "blob"; })) ==
        "state.particles[0].type");
  CHECK(schema_path("{not json") == "<document>");
}

TEST_CASE("time grid needs at least three snapshots") {
  CHECK(schema_path(edited([](auto& j) { j["time"]["steps"] = 1; })) != "");
  CHECK(schema_path(edited([](auto& j) {
          j["time"]["steps"] = 4;
          j["time"]["snapshot_every"] = 3;
        })) != "");
  CHECK(schema_path(edited([](auto& j) {
          j["time"]["steps"] = 4;
          j["time"]["snapshot_every"] = 2;
        })) == "");
}

TEST_CASE("closed-form method is refused for interacting systems") {
  auto text = edited([](auto& j) {
    j["sorts"][0]["count"] = 2;
    j["potential"]["terms"] = nlohmann::json::array({{{"type", "soft_coulomb"}, {"strength", 1.0}, {"softening", 1.0}}});
    j["state"]["particles"].push_back(j["state"]["particles"][0]);
    j["state"]["particles"][1]["center"] = {2.0};
    j["grid"]["points"] = 32;
  });
  CHECK_NOTHROW(parse_scenario(text));
  auto j = nlohmann::json::parse(text);
  j["time"]["method"] = "exact";
  CHECK_THROWS_AS(parse_scenario(j.dump()), SchemaError);
}
