#pragma once

// Residuals of the marginal balance equations, the checks that tie them
// together, convergence studies and the report that collects everything.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhd/calculus.hpp"
#include "qhd/model.hpp"
#include "qhd/mpqhd.hpp"
#include "qhd/residual.hpp"
#include "qhd/snapshot.hpp"

namespace qhd {

/// Hydrodynamic fields at index-1, index, index+1 of a series.
struct HydroSlice {
  std::vector<MpqhdFieldSet> prev, now, next;
  MpqhdTotals total_prev, total_now, total_next;
  double dt = 0.0;
  double time = 0.0;
  double cell_volume = 0.0;
};

HydroSlice hydro_slice(const GridCalculus& calculus, const Model& model, const SnapshotSeries& series,
                       std::size_t index, MpqhdOptions options = {});

/// Which balance law: a sort index, or the whole ensemble when empty.
using SortSelector = std::optional<std::size_t>;

/// ∂_tρ + ∇·j. Terms "drho/dt", "div j".
Residual mpqhd_continuity_residual(const GridCalculus& calculus, const HydroSlice& slice,
                                   SortSelector sort);
/// ∂_t j − f + ∇·Π. Terms "dj/dt", "f", "div Pi".
Residual ehrenfest_residual(const GridCalculus& calculus, const HydroSlice& slice, SortSelector sort);

struct CauchyResult {
  /// ρ∂_t v + ρ(v·∇)v − f + ∇·p. Terms "rho dv/dt", "rho (v.grad)v", "f", "div p".
  Residual residual;
  /// Cauchy residual − [Ehrenfest residual − v·(continuity residual)], relative
  /// to the Cauchy denominator.
  Residual equivalence;
  /// Left side ρ[∂_t v + (v·∇)v].
  VectorField lhs;
};

/// ρ∂_t v is formed as ∂_t j − v∂_tρ and ρ(v·∇)v as ∇·(j⊗j/ρ) − v∇·j, the
/// discrete forms that keep the product rule exact on the grid.
CauchyResult cauchy_residual(const GridCalculus& calculus, const HydroSlice& slice, SortSelector sort);

/// f_qu + ∇·Π^qu on one sort's fields. Terms "f_qu", "div Pi_qu".
Residual force_identity_residual(const GridCalculus& calculus, const MpqhdFieldSet& fields);

/// ‖R_tot − Σ_A R_A‖ relative to max(total denominator, Σ_A sort denominators).
double total_sum_gap(const Residual& total, const std::vector<Residual>& per_sort, double cell_volume);

struct NonlinearityResult {
  double cauchy_gap = 0.0;       // ‖Σ_A LHS_A − LHS_tot‖
  double cauchy_residual = 0.0;  // ‖R_C,tot‖ (absolute)
  double ratio = 0.0;            // cauchy_gap / cauchy_residual
  double ehrenfest_gap = 0.0;    // relative, see total_sum_gap
  double velocity_spread = 0.0;  // Σ_A‖ρ_A(v_A − v_tot)‖ / Σ_A‖j_A‖
  bool inconclusive = false;     // sorts move with a common velocity field
};

NonlinearityResult nonlinearity_demo(const GridCalculus& calculus, const HydroSlice& slice);

// --- convergence ----------------------------------------------------------------

struct ConvergenceRow {
  double resolution = 0.0;  // the varied parameter as given (Δt or n)
  double step = 0.0;        // Δt, or Δq for a grid study
  double norm = 0.0;
};

struct ConvergenceTable {
  std::string scenario;
  std::string equation;
  std::string parameter;  // "dt" or "n"
  std::vector<ConvergenceRow> rows;
  std::optional<double> order;  // least-squares slope of log norm vs log step
  std::vector<std::string> flags;
};

/// `evaluate(resolution)` returns the residual norm at that resolution.
ConvergenceTable convergence_study(const std::string& scenario, const std::string& equation,
                                   const std::string& parameter, const std::vector<double>& resolutions,
                                   const std::function<ConvergenceRow(double)>& evaluate,
                                   double floor = 1e-13);

/// Slope of log y against log x by least squares.
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

// --- report -----------------------------------------------------------------------

struct ReportEntry {
  std::string scenario;
  std::string equation;
  std::string sort;        // sort label, particle label, "total" or "-"
  std::string resolution;  // e.g. "n=256 dt=0.001"
  double time = 0.0;
  double norm = 0.0;
  double denominator = 0.0;
  double coverage = 100.0;
  std::optional<double> order;
  double tolerance = 0.0;
  bool lower_bound = false;  // passes when norm >= tolerance
  bool passed = false;
  std::vector<std::string> flags;
};

class ResidualReport {
 public:
  void add(ReportEntry e);
  void add(const ConvergenceTable& table);
  /// Sorts entries by (scenario, equation, sort, resolution).
  void sort();

  const std::vector<ReportEntry>& entries() const noexcept { return entries_; }
  const std::vector<ConvergenceTable>& convergence() const noexcept { return convergence_; }
  bool all_passed() const;

  std::string to_json() const;
  std::string to_text() const;

 private:
  std::vector<ReportEntry> entries_;
  std::vector<ConvergenceTable> convergence_;
};

/// Per-equation thresholds; unknown equations fall back to `fallback`.
class Tolerances {
 public:
  Tolerances();
  double get(const std::string& equation) const;
  void set(const std::string& equation, double value);
  bool is_lower_bound(const std::string& equation) const;
  /// JSON object {"equation": value, ...}; unknown keys are rejected.
  static Tolerances from_json_text(const std::string& text);
  const std::map<std::string, double>& values() const noexcept { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// Fills tolerance, lower_bound and passed from `tol`.
ReportEntry judged(ReportEntry e, const Tolerances& tol);

}  // namespace qhd
