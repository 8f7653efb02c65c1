#pragma once

// Scenario files (JSON text) and the built-in presets.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qhd/model.hpp"
#include "qhd/states.hpp"

namespace qhd {

struct TimeGrid {
  enum class Method { exact, propagate };
  double t0 = 0.0;
  double dt = 1e-3;           // integration step
  std::size_t steps = 2;      // integration steps
  std::size_t snapshot_every = 1;
  Method method = Method::propagate;

  double snapshot_spacing() const { return dt * static_cast<double>(snapshot_every); }
  std::size_t snapshot_count() const { return steps / snapshot_every + 1; }
};

struct TrajectorySpec {
  std::size_t count = 0;
  double until = 0.0;    // end time of the trajectory run
  double cadence = 0.0;  // spacing of stored velocity snapshots
  std::size_t cells_per_bin = 1;
};

struct ConvergenceSpec {
  std::vector<double> dt;           // snapshot spacings for the temporal study
  std::vector<std::size_t> points;  // grid sizes for the spatial study
};

struct Scenario {
  std::string name;
  std::string description;
  double hbar = 1.0;
  std::size_t spatial_dim = 1;
  std::vector<SortLayout> sorts;
  AxisSpec grid;
  std::size_t axis_cap = ConfigurationGrid::default_axis_cap;
  Potential potential;
  StateSpec state;
  TimeGrid time;
  double node_threshold = 1e-10;
  double density_threshold = 1e-10;
  std::optional<TrajectorySpec> trajectories;
  std::optional<ConvergenceSpec> convergence;

  ConfigurationGrid configuration_grid() const;
  Model model() const;
};

/// Parses and validates scenario JSON. Violations throw SchemaError naming
/// the field, e.g. `sorts[0].mass`.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);
std::string scenario_to_json(const Scenario& s);

const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
Scenario preset(const std::string& name);

}  // namespace qhd
