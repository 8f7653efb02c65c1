// qhydro: batch front end for the configuration-space hydrodynamics library.
//
//   qhydro run --scenario free_gaussian --stages verify --out out/
//   qhydro list-scenarios
//   qhydro show-scenario coherent
//   qhydro inspect out/snapshots.qhd

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qhd/error.hpp"
#include "qhd/io.hpp"
#include "qhd/kernels.hpp"
#include "qhd/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> all_stages{"propagate", "extract", "reduce", "verify", "trajectories", "convergence"};

struct RunArgs {
  std::string scenario;
  std::vector<std::string> stages;
  std::string out = "qhydro-out";
  std::uint64_t seed = 1;
  std::string grid_override;
  std::optional<double> dt_override;
  std::string tolerances;
  std::string snapshots;
  std::string precision = "c128";
};

qhd::Scenario resolve_scenario(const std::string& spec) {
  if (fs::exists(spec)) return qhd::load_scenario_file(spec);
  const auto stem = fs::path(spec).stem().string();
  if (qhd::is_preset(spec)) return qhd::preset(spec);
  if (qhd::is_preset(stem)) return qhd::preset(stem);
  throw qhd::Error("'" + spec + "' is neither a scenario file nor a preset name");
}

std::optional<std::size_t> parse_grid_override(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto eq = text.find('=');
  if (eq == std::string::npos || text.substr(0, eq) != "n")
    throw qhd::Error("--grid-override expects n=<points>, got '" + text + "'");
  std::size_t pos = 0;
  const auto n = std::stoull(text.substr(eq + 1), &pos);
  if (pos != text.size() - eq - 1) throw qhd::Error("--grid-override: bad number in '" + text + "'");
  return n;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qhd::Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw qhd::Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw qhd::Error("write to '" + path.string() + "' failed");
}

template <class F>
void write_with(const fs::path& path, F&& body) {
  std::ofstream out(path);
  if (!out) throw qhd::Error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw qhd::Error("write to '" + path.string() + "' failed");
}

int run(const RunArgs& args) {
  auto scenario = resolve_scenario(args.scenario);
  scenario = qhd::with_overrides(std::move(scenario), parse_grid_override(args.grid_override), args.dt_override);

  std::set<std::string> stages(args.stages.begin(), args.stages.end());
  if (stages.empty()) {
    stages = {"propagate", "extract", "reduce", "verify"};
    if (scenario.trajectories) stages.insert("trajectories");
    if (scenario.convergence) stages.insert("convergence");
  }
  for (const auto& s : stages)
    if (std::find(all_stages.begin(), all_stages.end(), s) == all_stages.end())
      throw qhd::Error("unknown stage '" + s + "'");

  const auto tol = args.tolerances.empty() ? qhd::Tolerances()
                                           : qhd::Tolerances::from_json_text(read_text(args.tolerances));
  const fs::path out(args.out);
  fs::create_directories(out);

  ordered_json manifest;
  manifest["program"] = "qhydro";
  manifest["version"] = "0.1.0";
  manifest["scenario"] = args.scenario;
  manifest["scenario_name"] = scenario.name;
  manifest["output"] = args.out;
  manifest["stages"] = ordered_json::array();
  for (const auto& s : all_stages)
    if (stages.count(s)) manifest["stages"].push_back(s);
  manifest["grid_points"] = scenario.grid.points;
  manifest["dt"] = scenario.time.dt;
  manifest["seed"] = args.seed;
  manifest["snapshots_imported"] = args.snapshots.empty() ? ordered_json(nullptr) : ordered_json(args.snapshots);
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  write_text(out / "scenario.json", qhd::scenario_to_json(scenario));

  const bool needs_series = stages.count("propagate") || stages.count("extract") || stages.count("reduce") ||
                            stages.count("verify");
  std::optional<qhd::SnapshotSeries> series;
  if (needs_series) {
    if (!args.snapshots.empty()) {
      series = qhd::load_series(args.snapshots);
      if (!(series->grid() == scenario.configuration_grid()))
        throw qhd::FormatError("imported snapshots do not match the scenario grid");
    } else {
      series = qhd::build_series(scenario);
    }
  }
  const std::size_t mid = series ? series->size() / 2 : 0;

  if (stages.count("propagate")) {
    const auto kind = args.precision == "c64" ? qhd::ValueKind::complex64 : qhd::ValueKind::complex128;
    qhd::save_series((out / "snapshots.qhd").string(), *series, kind);
  }
  if (stages.count("extract")) {
    const qhd::GridCalculus calc(series->grid());
    qhd::BohmAnalysis a(calc, series->hbar(), (*series)[mid].psi, qhd::bohm_options(scenario));
    auto fields = a.fields();
    fields.time = (*series)[mid].time;
    if (a.mask_warning()) std::cerr << "warning: node mask covers more than 20% of the grid\n";
    write_with(out / "bohm_fields.csv", [&](std::ostream& os) { qhd::write_bohm_csv(os, series->grid(), fields); });
  }
  if (stages.count("reduce")) {
    const qhd::GridCalculus calc(series->grid());
    qhd::MpqhdAnalysis a(calc, scenario.potential, series->hbar(), (*series)[mid], qhd::mpqhd_options(scenario));
    const auto sorts = a.all_sorts();
    for (const auto& s : sorts)
      write_with(out / ("hydro_" + series->grid().sort(s.sort).label + ".csv"),
                 [&](std::ostream& os) { qhd::write_hydro_csv(os, series->grid(), s); });
    qhd::write_field_file((out / "hydro.qhd").string(), qhd::hydro_field_file(series->grid(), series->hbar(), sorts));
  }

  qhd::ResidualReport report;
  bool judged = false;
  if (stages.count("verify")) {
    qhd::verify_series(scenario, *series, tol, report);
    judged = true;
  }
  if (stages.count("trajectories")) {
    auto traj = qhd::run_trajectories(scenario, args.seed, tol, report);
    write_with(out / "trajectories.csv", [&](std::ostream& os) { qhd::write_trajectories_csv(os, traj.bundle); });
    judged = true;
  }
  if (stages.count("convergence")) {
    qhd::run_convergence(scenario, tol, report);
    judged = true;
  }
  if (!judged) return 0;
  report.sort();
  auto json = ordered_json::parse(report.to_json());
  json["seed"] = args.seed;
  write_text(out / "report.json", json.dump(2) + "\n");
  write_text(out / "report.txt", report.to_text());
  std::cout << report.to_text();
  return report.all_passed() ? 0 : 2;
}

int list_scenarios() {
  for (const auto& name : qhd::preset_names()) {
    const auto s = qhd::preset(name);
    std::cout << std::left << std::setw(22) << name << s.description << '\n';
  }
  return 0;
}

int show_scenario(const std::string& spec) {
  std::cout << qhd::scenario_to_json(resolve_scenario(spec));
  return 0;
}

const char* kind_name(qhd::ValueKind k) {
  switch (k) {
    case qhd::ValueKind::complex64:
      return "complex64";
    case qhd::ValueKind::complex128:
      return "complex128";
    default:
      return "float64";
  }
}

int inspect(const std::string& path) {
  const auto f = qhd::read_field_file(path);
  std::cout << "kind        " << kind_name(f.kind) << "\ncomponents  " << f.components << "\nspatial_dim "
            << f.spatial_dim << "\nhbar        " << f.hbar << "\naxis        [" << f.axis.min << ", " << f.axis.max
            << ") x " << f.axis.points << "\naxes        " << f.axis_count << "\nsorts      ";
  for (const auto& s : f.sorts) std::cout << ' ' << s.label << "(N=" << s.count << ", m=" << s.mass << ")";
  std::cout << "\nframes      " << f.times.size();
  if (!f.times.empty()) std::cout << "  t = " << f.times.front() << " .. " << f.times.back();
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Configuration-space quantum hydrodynamics: fields, residuals, trajectories"};
  app.require_subcommand(1);

  RunArgs args;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario through the pipeline");
  run_cmd->add_option("--scenario", args.scenario, "Scenario file or preset name")->required();
  run_cmd->add_option("--stages", args.stages, "Comma-separated subset of " + [] {
    std::string s;
    for (const auto& x : all_stages) s += (s.empty() ? "" : ",") + x;
    return s;
  }())->delimiter(',');
  run_cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--seed", args.seed, "Trajectory sampling seed")->capture_default_str();
  run_cmd->add_option("--grid-override", args.grid_override, "Replace the grid size, e.g. n=128");
  run_cmd->add_option("--dt-override", args.dt_override, "Replace the integration step")->check(CLI::PositiveNumber);
  run_cmd->add_option("--tolerances", args.tolerances, "JSON file of per-equation tolerances");
  run_cmd->add_option("--snapshots", args.snapshots, "Import a snapshot file instead of generating one");
  run_cmd->add_option("--snapshot-precision", args.precision, "Stored amplitude precision")
      ->check(CLI::IsMember({"c64", "c128"}))
      ->capture_default_str();

  auto* list_cmd = app.add_subcommand("list-scenarios", "Print the built-in presets");
  std::string show_arg;
  auto* show_cmd = app.add_subcommand("show-scenario", "Print a scenario as normalized JSON");
  show_cmd->add_option("scenario", show_arg, "Scenario file or preset name")->required();
  std::string inspect_arg;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a binary field file");
  inspect_cmd->add_option("file", inspect_arg)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return run(args);
    if (*list_cmd) return list_scenarios();
    if (*show_cmd) return show_scenario(show_arg);
    if (*inspect_cmd) return inspect(inspect_arg);
  } catch (const qhd::SchemaError& e) {
    std::cerr << "qhydro: schema error: " << e.what() << '\n';
    return 1;
  } catch (const qhd::BoundaryLeakError& e) {
    std::cerr << "qhydro: " << e.what() << " (t=" << e.time() << ", edge probability " << e.probability() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "qhydro: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
