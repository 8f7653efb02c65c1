#include "qhd/scenario.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qhd/error.hpp"

namespace qhd {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Walks a JSON object while remembering where it is, so every complaint
// names the offending field.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, what); }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items())
      if (!ok.count(key)) throw SchemaError(child_path(key), "unknown field");
  }

  bool has(const char* key) const { return j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.contains(key)) throw SchemaError(child_path(key), "missing required field");
    return Node(j_.at(key), child_path(key));
  }

  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }

  double positive() const {
    const double x = number();
    if (!(x > 0.0)) fail("must be positive");
    return x;
  }

  std::size_t count() const {
    if (!j_.is_number_integer() || j_.get<long long>() < 0) fail("expected a non-negative integer");
    return j_.get<std::size_t>();
  }

  std::string text() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  std::vector<double> numbers(std::size_t expected) const {
    const std::size_t n = array_size();
    if (n != expected) fail("expected " + std::to_string(expected) + " entries, got " + std::to_string(n));
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(at(i).number());
    return out;
  }

  double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

FieldEnvelope parse_envelope(const Node& n) {
  n.require_object({"kind", "duration", "carrier"});
  FieldEnvelope e;
  const auto kind = n.at("kind").text();
  if (kind == "constant") {
    e.kind = FieldEnvelope::Kind::constant;
  } else if (kind == "zero") {
    e.kind = FieldEnvelope::Kind::zero;
  } else if (kind == "sin2_pulse") {
    e.kind = FieldEnvelope::Kind::sin2_pulse;
    e.duration = n.at("duration").positive();
    e.carrier = n.number_or("carrier", 0.0);
  } else {
    n.at("kind").fail("expected constant, zero or sin2_pulse");
  }
  return e;
}

PotentialTerm parse_term(const Node& n, std::size_t sorts, std::size_t nu) {
  if (!n.raw().is_object()) n.fail("expected an object");
  const auto type = n.at("type").text();
  if (type == "harmonic") {
    n.require_object({"type", "omega", "center"});
    HarmonicTrap h;
    h.omega = n.at("omega").numbers(sorts);
    for (std::size_t s = 0; s < sorts; ++s)
      if (!(h.omega[s] > 0.0)) n.at("omega").at(s).fail("must be positive");
    if (n.has("center")) h.center = n.at("center").numbers(nu);
    return h;
  }
  if (type == "soft_coulomb") {
    n.require_object({"type", "strength", "softening"});
    SoftCoulombPair c;
    c.strength = n.at("strength").number();
    c.softening = n.at("softening").positive();
    return c;
  }
  if (type == "uniform_field") {
    n.require_object({"type", "amplitude", "charge", "envelope"});
    UniformField f;
    f.amplitude = n.at("amplitude").numbers(nu);
    f.charge = n.at("charge").numbers(sorts);
    if (n.has("envelope")) f.envelope = parse_envelope(n.at("envelope"));
    return f;
  }
  n.at("type").fail("expected harmonic, soft_coulomb or uniform_field");
}

ParticleState parse_particle(const Node& n, std::size_t nu) {
  if (!n.raw().is_object()) n.fail("expected an object");
  const auto type = n.at("type").text();
  if (type == "gaussian") {
    n.require_object({"type", "center", "width", "momentum"});
    GaussianPacket g;
    g.center = n.at("center").numbers(nu);
    g.width = n.at("width").positive();
    g.momentum = n.has("momentum") ? n.at("momentum").numbers(nu) : std::vector<double>(nu, 0.0);
    return g;
  }
  if (type == "eigenstate") {
    n.require_object({"type", "quanta"});
    HarmonicEigenstate e;
    const auto q = n.at("quanta");
    if (q.array_size() != nu) q.fail("expected " + std::to_string(nu) + " entries");
    for (std::size_t i = 0; i < nu; ++i) e.quanta.push_back(static_cast<unsigned>(q.at(i).count()));
    return e;
  }
  if (type == "coherent") {
    n.require_object({"type", "displacement", "momentum"});
    CoherentState c;
    c.displacement = n.at("displacement").numbers(nu);
    c.momentum = n.has("momentum") ? n.at("momentum").numbers(nu) : std::vector<double>(nu, 0.0);
    return c;
  }
  n.at("type").fail("expected gaussian, eigenstate or coherent");
}

Exchange parse_exchange(const Node& n) {
  const auto s = n.text();
  if (s == "none") return Exchange::none;
  if (s == "symmetric") return Exchange::symmetric;
  if (s == "antisymmetric") return Exchange::antisymmetric;
  n.fail("expected none, symmetric or antisymmetric");
}

const char* exchange_name(Exchange e) {
  switch (e) {
    case Exchange::symmetric:
      return "symmetric";
    case Exchange::antisymmetric:
      return "antisymmetric";
    default:
      return "none";
  }
}

const char* envelope_name(FieldEnvelope::Kind k) {
  switch (k) {
    case FieldEnvelope::Kind::zero:
      return "zero";
    case FieldEnvelope::Kind::sin2_pulse:
      return "sin2_pulse";
    default:
      return "constant";
  }
}

// --- presets -------------------------------------------------------------------

struct PresetText {
  const char* name;
  const char* json;
};

const PresetText presets[] = {
    {"stationary", R"J({
  "name": "stationary",
  "description": "Oscillator ground state; every flow vanishes and V + V_qu is constant",
  "spatial_dim": 1,
  "sorts": [{"label": "A", "count": 1, "mass": 1.0}],
  "grid": {"min": -10.0, "max": 10.0, "points": 128},
  "potential": {"terms": [{"type": "harmonic", "omega": [1.0]}]},
  "state": {"particles": [{"type": "eigenstate", "quanta": [0]}]},
  "time": {"t0": 0.0, "dt": 0.001, "steps": 2, "method": "exact"}
})J"},
    {"free_gaussian", R"J({
  "name": "free_gaussian",
  "description": "Free spreading wave packet with mean momentum, split-operator propagated",
  "spatial_dim": 1,
  "sorts": [{"label": "A", "count": 1, "mass": 1.0}],
  "grid": {"min": -20.0, "max": 20.0, "points": 256},
  "potential": {"terms": []},
  "state": {"particles": [{"type": "gaussian", "center": [-1.0], "width": 1.0, "momentum": [1.0]}]},
  "time": {"t0": 0.0, "dt": 0.001, "steps": 2, "method": "propagate"},
  "trajectories": {"count": 10000, "until": 1.0, "cadence": 0.01, "cells_per_bin": 4},
  "convergence": {"dt": [0.004, 0.002, 0.001], "points": [64, 128, 256]}
})J"},
    {"coherent", R"J({
  "name": "coherent",
  "description": "Displaced oscillator ground state riding the classical orbit",
  "spatial_dim": 1,
  "sorts": [{"label": "A", "count": 1, "mass": 1.0}],
  "grid": {"min": -16.0, "max": 16.0, "points": 256},
  "potential": {"terms": [{"type": "harmonic", "omega": [1.0]}]},
  "state": {"particles": [{"type": "coherent", "displacement": [1.5], "momentum": [1.0]}]},
  "time": {"t0": 0.0, "dt": 0.001, "steps": 2, "method": "propagate"}
})J"},
    {"two_sort_product", R"J({
  "name": "two_sort_product",
  "description": "Light and heavy free packets in a product state (mass ratio 4)",
  "spatial_dim": 1,
  "sorts": [{"label": "A", "count": 1, "mass": 1.0}, {"label": "B", "count": 1, "mass": 4.0}],
  "grid": {"min": -16.0, "max": 16.0, "points": 128},
  "potential": {"terms": []},
  "state": {"particles": [
    {"type": "gaussian", "center": [-1.0], "width": 1.0, "momentum": [0.5]},
    {"type": "gaussian", "center": [1.0], "width": 0.8, "momentum": [-1.0]}]},
  "time": {"t0": 0.0, "dt": 0.001, "steps": 2, "method": "propagate"}
})J"},
    {"symmetrized_pair", R"J({
  "name": "symmetrized_pair",
  "description": "Two identical bosons in a trap with soft-Coulomb repulsion",
  "spatial_dim": 1,
  "sorts": [{"label": "A", "count": 2, "mass": 1.0}],
  "grid": {"min": -12.0, "max": 12.0, "points": 128},
  "potential": {"terms": [
    {"type": "harmonic", "omega": [1.0]},
    {"type": "soft_coulomb", "strength": 1.0, "softening": 1.0}]},
  "state": {"particles": [
    {"type": "gaussian", "center": [-1.5], "width": 0.7, "momentum": [0.5]},
    {"type": "gaussian", "center": [1.5], "width": 0.7, "momentum": [-0.5]}],
    "symmetry": "symmetric"},
  "time": {"t0": 0.0, "dt": 0.001, "steps": 2, "method": "propagate"}
})J"},
    {"opposite_boost_pair", R"J({
  "name": "opposite_boost_pair",
  "description": "Two sorts launched from the same spot with opposite momenta",
  "spatial_dim": 1,
  "sorts": [{"label": "A", "count": 1, "mass": 1.0}, {"label": "B", "count": 1, "mass": 1.0}],
  "grid": {"min": -16.0, "max": 16.0, "points": 128},
  "potential": {"terms": []},
  "state": {"particles": [
    {"type": "gaussian", "center": [0.0], "width": 1.0, "momentum": [2.0]},
    {"type": "gaussian", "center": [0.0], "width": 1.0, "momentum": [-2.0]}]},
  "time": {"t0": 0.0, "dt": 0.001, "steps": 2, "method": "exact"}
})J"},
};

}  // namespace

ConfigurationGrid Scenario::configuration_grid() const {
  return ConfigurationGrid(sorts, spatial_dim, grid, axis_cap);
}

Model Scenario::model() const { return Model{configuration_grid(), potential, hbar}; }

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("<document>", std::string("not valid JSON: ") + e.what());
  }
  const Node top(root, "");
  top.require_object({"name", "description", "hbar", "spatial_dim", "sorts", "grid", "potential", "state",
                      "time", "node_threshold", "density_threshold", "trajectories", "convergence"});
  Scenario s;
  s.name = top.has("name") ? top.at("name").text() : "unnamed";
  if (top.has("description")) s.description = top.at("description").text();
  if (top.has("hbar")) s.hbar = top.at("hbar").positive();
  if (top.has("spatial_dim")) {
    s.spatial_dim = top.at("spatial_dim").count();
    if (s.spatial_dim < 1 || s.spatial_dim > 3) top.at("spatial_dim").fail("must be 1, 2 or 3");
  }
  const std::size_t nu = s.spatial_dim;

  const auto sorts = top.at("sorts");
  if (sorts.array_size() == 0) sorts.fail("at least one sort is required");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < sorts.array_size(); ++i) {
    const auto n = sorts.at(i);
    n.require_object({"label", "count", "mass"});
    SortLayout l;
    l.label = n.at("label").text();
    if (l.label.empty()) n.at("label").fail("must not be empty");
    if (!labels.insert(l.label).second) n.at("label").fail("duplicate sort label");
    l.count = n.at("count").count();
    if (l.count < 1) n.at("count").fail("must be at least 1");
    l.mass = n.at("mass").positive();
    s.sorts.push_back(l);
  }

  const auto grid = top.at("grid");
  grid.require_object({"min", "max", "points", "axis_cap"});
  s.grid.min = grid.at("min").number();
  s.grid.max = grid.at("max").number();
  if (!(s.grid.max > s.grid.min)) grid.at("max").fail("must exceed grid.min");
  s.grid.points = grid.at("points").count();
  if (s.grid.points < 4 || (s.grid.points & (s.grid.points - 1)) != 0)
    grid.at("points").fail("must be a power of two >= 4");
  if (grid.has("axis_cap")) s.axis_cap = grid.at("axis_cap").count();

  const auto pot = top.at("potential");
  pot.require_object({"terms"});
  std::vector<PotentialTerm> terms;
  if (pot.has("terms")) {
    const auto t = pot.at("terms");
    for (std::size_t i = 0; i < t.array_size(); ++i) terms.push_back(parse_term(t.at(i), s.sorts.size(), nu));
  }
  s.potential = Potential(std::move(terms));

  const auto state = top.at("state");
  state.require_object({"particles", "symmetry"});
  const auto parts = state.at("particles");
  std::size_t total = 0;
  for (const auto& l : s.sorts) total += l.count;
  if (parts.array_size() != total)
    parts.fail("expected one entry per particle (" + std::to_string(total) + ")");
  for (std::size_t i = 0; i < total; ++i) s.state.particles.push_back(parse_particle(parts.at(i), nu));
  if (state.has("symmetry")) {
    const auto sym = state.at("symmetry");
    if (sym.raw().is_string()) {
      s.state.exchange.assign(s.sorts.size(), parse_exchange(sym));
    } else {
      if (sym.array_size() != s.sorts.size()) sym.fail("expected one entry per sort");
      for (std::size_t i = 0; i < s.sorts.size(); ++i) s.state.exchange.push_back(parse_exchange(sym.at(i)));
    }
  }

  const auto time = top.at("time");
  time.require_object({"t0", "dt", "steps", "snapshot_every", "method"});
  s.time.t0 = time.number_or("t0", 0.0);
  s.time.dt = time.at("dt").positive();
  s.time.steps = time.at("steps").count();
  if (time.has("snapshot_every")) {
    s.time.snapshot_every = time.at("snapshot_every").count();
    if (s.time.snapshot_every < 1) time.at("snapshot_every").fail("must be at least 1");
  }
  if (s.time.steps % s.time.snapshot_every != 0)
    time.at("steps").fail("must be a multiple of time.snapshot_every");
  if (s.time.snapshot_count() < 3) time.at("steps").fail("at least three snapshots are required");
  if (time.has("method")) {
    const auto m = time.at("method").text();
    if (m == "exact") s.time.method = TimeGrid::Method::exact;
    else if (m == "propagate") s.time.method = TimeGrid::Method::propagate;
    else time.at("method").fail("expected exact or propagate");
  }

  if (top.has("node_threshold")) s.node_threshold = top.at("node_threshold").positive();
  if (top.has("density_threshold")) s.density_threshold = top.at("density_threshold").positive();

  if (top.has("trajectories")) {
    const auto t = top.at("trajectories");
    t.require_object({"count", "until", "cadence", "cells_per_bin"});
    TrajectorySpec ts;
    ts.count = t.at("count").count();
    ts.until = t.at("until").number();
    if (!(ts.until > s.time.t0)) t.at("until").fail("must be later than time.t0");
    ts.cadence = t.at("cadence").positive();
    if (t.has("cells_per_bin")) {
      ts.cells_per_bin = t.at("cells_per_bin").count();
      if (ts.cells_per_bin < 1) t.at("cells_per_bin").fail("must be at least 1");
    }
    s.trajectories = ts;
  }
  if (top.has("convergence")) {
    const auto c = top.at("convergence");
    c.require_object({"dt", "points"});
    ConvergenceSpec cs;
    if (c.has("dt")) {
      const auto d = c.at("dt");
      for (std::size_t i = 0; i < d.array_size(); ++i) cs.dt.push_back(d.at(i).positive());
    }
    if (c.has("points")) {
      const auto p = c.at("points");
      for (std::size_t i = 0; i < p.array_size(); ++i) {
        const auto n = p.at(i).count();
        if (n < 4 || (n & (n - 1)) != 0) p.at(i).fail("must be a power of two >= 4");
        cs.points.push_back(n);
      }
    }
    s.convergence = cs;
  }

  // Cross-field checks that need the assembled model.
  try {
    const auto model = s.model();
    model.potential.check(model.grid);
    check_state(s.state, model);
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError("<scenario>", e.what());
  }
  if (s.time.method == TimeGrid::Method::exact && !evolves_in_closed_form(s.state, s.model()))
    time.at("method").fail("exact evolution is not available for this state and potential");
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["hbar"] = s.hbar;
  j["spatial_dim"] = s.spatial_dim;
  j["sorts"] = ordered_json::array();
  for (const auto& l : s.sorts) j["sorts"].push_back({{"label", l.label}, {"count", l.count}, {"mass", l.mass}});
  j["grid"] = {{"min", s.grid.min}, {"max", s.grid.max}, {"points", s.grid.points}, {"axis_cap", s.axis_cap}};
  ordered_json terms = ordered_json::array();
  for (const auto& term : s.potential.terms()) {
    if (const auto* h = std::get_if<HarmonicTrap>(&term)) {
      ordered_json t{{"type", "harmonic"}, {"omega", h->omega}};
      if (!h->center.empty()) t["center"] = h->center;
      terms.push_back(t);
    } else if (const auto* c = std::get_if<SoftCoulombPair>(&term)) {
      terms.push_back({{"type", "soft_coulomb"}, {"strength", c->strength}, {"softening", c->softening}});
    } else {
      const auto& f = std::get<UniformField>(term);
      ordered_json env{{"kind", envelope_name(f.envelope.kind)}};
      if (f.envelope.kind == FieldEnvelope::Kind::sin2_pulse) {
        env["duration"] = f.envelope.duration;
        env["carrier"] = f.envelope.carrier;
      }
      terms.push_back({{"type", "uniform_field"}, {"amplitude", f.amplitude}, {"charge", f.charge}, {"envelope", env}});
    }
  }
  j["potential"] = {{"terms", terms}};
  ordered_json parts = ordered_json::array();
  for (const auto& p : s.state.particles) {
    if (const auto* g = std::get_if<GaussianPacket>(&p))
      parts.push_back({{"type", "gaussian"}, {"center", g->center}, {"width", g->width}, {"momentum", g->momentum}});
    else if (const auto* e = std::get_if<HarmonicEigenstate>(&p))
      parts.push_back({{"type", "eigenstate"}, {"quanta", e->quanta}});
    else {
      const auto& c = std::get<CoherentState>(p);
      parts.push_back({{"type", "coherent"}, {"displacement", c.displacement}, {"momentum", c.momentum}});
    }
  }
  j["state"]["particles"] = parts;
  ordered_json sym = ordered_json::array();
  for (auto e : s.state.exchange) sym.push_back(exchange_name(e));
  if (!s.state.exchange.empty()) j["state"]["symmetry"] = sym;
  j["time"] = {{"t0", s.time.t0},
               {"dt", s.time.dt},
               {"steps", s.time.steps},
               {"snapshot_every", s.time.snapshot_every},
               {"method", s.time.method == TimeGrid::Method::exact ? "exact" : "propagate"}};
  j["node_threshold"] = s.node_threshold;
  j["density_threshold"] = s.density_threshold;
  if (s.trajectories)
    j["trajectories"] = {{"count", s.trajectories->count},
                         {"until", s.trajectories->until},
                         {"cadence", s.trajectories->cadence},
                         {"cells_per_bin", s.trajectories->cells_per_bin}};
  if (s.convergence) j["convergence"] = {{"dt", s.convergence->dt}, {"points", s.convergence->points}};
  return j.dump(2) + "\n";
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& p : presets) v.emplace_back(p.name);
    return v;
  }();
  return names;
}

bool is_preset(const std::string& name) {
  for (const auto& p : presets)
    if (name == p.name) return true;
  return false;
}

Scenario preset(const std::string& name) {
  for (const auto& p : presets)
    if (name == p.name) return parse_scenario(p.json);
  throw Error("unknown preset '" + name + "'");
}

}  // namespace qhd
