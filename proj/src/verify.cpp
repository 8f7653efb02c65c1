#include "qhd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "qhd/error.hpp"

namespace qhd {

namespace {

const HydroFields& pick(const std::vector<MpqhdFieldSet>& sorts, const MpqhdTotals& total,
                        SortSelector sel) {
  if (!sel) return total;
  if (*sel >= sorts.size()) throw Error("sort index out of range");
  return sorts[*sel];
}

ScalarField central(const ScalarField& prev, const ScalarField& next, double dt) {
  ScalarField out(prev.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (next[i] - prev[i]) / (2.0 * dt);
  return out;
}

VectorField central(const VectorField& prev, const VectorField& next, double dt) {
  VectorField out;
  for (std::size_t c = 0; c < prev.dim(); ++c) out.components.push_back(central(prev[c], next[c], dt));
  return out;
}

double reference_scale(const HydroFields& f, double dv) { return l2_norm(f.mass_density, dv); }

}  // namespace

HydroSlice hydro_slice(const GridCalculus& calculus, const Model& model, const SnapshotSeries& series,
                       std::size_t index, MpqhdOptions options) {
  series.require_interior(index);
  HydroSlice s;
  s.dt = series.time_step();
  s.time = series[index].time;
  s.cell_volume = calculus.grid().position_lattice().cell_volume();
  auto fields_at = [&](std::size_t k) {
    MpqhdAnalysis a(calculus, model.potential, model.hbar, series[k], options);
    return a.all_sorts();
  };
  s.prev = fields_at(index - 1);
  s.now = fields_at(index);
  s.next = fields_at(index + 1);
  s.total_prev = totals(s.prev, options);
  s.total_now = totals(s.now, options);
  s.total_next = totals(s.next, options);
  return s;
}

Residual mpqhd_continuity_residual(const GridCalculus& calculus, const HydroSlice& slice,
                                   SortSelector sort) {
  const auto& P = pick(slice.prev, slice.total_prev, sort);
  const auto& N = pick(slice.now, slice.total_now, sort);
  const auto& X = pick(slice.next, slice.total_next, sort);
  const auto drho = central(P.mass_density, X.mass_density, slice.dt);
  const auto divj = calculus.position_divergence(N.mass_current);
  Residual r;
  r.mask = N.density_mask;
  ScalarField res(drho.size());
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = r.mask[i] ? 0.0 : drho[i] + divj[i];
  r.components.push_back(std::move(res));
  const double dv = slice.cell_volume;
  r.terms = {{"drho/dt", l2_norm(drho, dv, r.mask)}, {"div j", l2_norm(divj, dv, r.mask)}};
  finalize(r, dv, reference_scale(N, dv));
  return r;
}

Residual ehrenfest_residual(const GridCalculus& calculus, const HydroSlice& slice, SortSelector sort) {
  const auto& P = pick(slice.prev, slice.total_prev, sort);
  const auto& N = pick(slice.now, slice.total_now, sort);
  const auto& X = pick(slice.next, slice.total_next, sort);
  const auto dj = central(P.mass_current, X.mass_current, slice.dt);
  const auto div_pi = calculus.position_divergence(N.flow);
  Residual r;
  r.mask = N.density_mask;
  for (std::size_t c = 0; c < dj.dim(); ++c) {
    ScalarField res(dj[c].size());
    for (std::size_t i = 0; i < res.size(); ++i)
      res[i] = r.mask[i] ? 0.0 : dj[c][i] - N.force[c][i] + div_pi[c][i];
    r.components.push_back(std::move(res));
  }
  const double dv = slice.cell_volume;
  r.terms = {{"dj/dt", l2_norm(dj, dv, r.mask)},
             {"f", l2_norm(N.force, dv, r.mask)},
             {"div Pi", l2_norm(div_pi, dv, r.mask)}};
  finalize(r, dv, reference_scale(N, dv));
  return r;
}

CauchyResult cauchy_residual(const GridCalculus& calculus, const HydroSlice& slice, SortSelector sort) {
  const auto& P = pick(slice.prev, slice.total_prev, sort);
  const auto& N = pick(slice.now, slice.total_now, sort);
  const auto& X = pick(slice.next, slice.total_next, sort);
  const auto& mask = N.density_mask;
  const auto& v = N.velocity;
  const std::size_t nu = v.dim();
  const std::size_t size = N.mass_density.size();

  const auto drho = central(P.mass_density, X.mass_density, slice.dt);
  const auto dj = central(P.mass_current, X.mass_current, slice.dt);
  const auto divj = calculus.position_divergence(N.mass_current);
  const auto div_flux = calculus.position_divergence(convective_flux(N.mass_density, N.mass_current, mask));
  const auto div_p = calculus.position_divergence(N.pressure_tensor);
  const auto div_pi = calculus.position_divergence(N.flow);

  auto unsteady = VectorField::zeros(nu, size);
  auto convective = VectorField::zeros(nu, size);
  CauchyResult out;
  out.lhs = VectorField::zeros(nu, size);
  out.residual.mask = mask;
  out.equivalence.mask = mask;
  for (std::size_t c = 0; c < nu; ++c) {
    ScalarField res(size, 0.0), eq(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
      if (mask[i]) continue;
      unsteady[c][i] = dj[c][i] - v[c][i] * drho[i];
      convective[c][i] = div_flux[c][i] - v[c][i] * divj[i];
      out.lhs[c][i] = unsteady[c][i] + convective[c][i];
      res[i] = out.lhs[c][i] - N.force[c][i] + div_p[c][i];
      const double ehrenfest = dj[c][i] - N.force[c][i] + div_pi[c][i];
      const double continuity = drho[i] + divj[i];
      eq[i] = res[i] - (ehrenfest - v[c][i] * continuity);
    }
    out.residual.components.push_back(std::move(res));
    out.equivalence.components.push_back(std::move(eq));
  }
  const double dv = slice.cell_volume;
  out.residual.terms = {{"rho dv/dt", l2_norm(unsteady, dv, mask)},
                        {"rho (v.grad)v", l2_norm(convective, dv, mask)},
                        {"f", l2_norm(N.force, dv, mask)},
                        {"div p", l2_norm(div_p, dv, mask)}};
  finalize(out.residual, dv, reference_scale(N, dv));
  out.equivalence.terms = out.residual.terms;
  finalize(out.equivalence, dv, reference_scale(N, dv));
  return out;
}

Residual force_identity_residual(const GridCalculus& calculus, const MpqhdFieldSet& fields) {
  const auto div = calculus.position_divergence(fields.flow_quantum);
  Residual r;
  r.mask = fields.density_mask;
  for (std::size_t c = 0; c < div.dim(); ++c) {
    ScalarField res(div[c].size());
    for (std::size_t i = 0; i < res.size(); ++i)
      res[i] = r.mask[i] ? 0.0 : fields.quantum_force[c][i] + div[c][i];
    r.components.push_back(std::move(res));
  }
  const double dv = calculus.grid().position_lattice().cell_volume();
  r.terms = {{"f_qu", l2_norm(fields.quantum_force, dv, r.mask)}, {"div Pi_qu", l2_norm(div, dv, r.mask)}};
  finalize(r, dv, l2_norm(fields.mass_density, dv));
  return r;
}

double total_sum_gap(const Residual& total, const std::vector<Residual>& per_sort, double cell_volume) {
  VectorField gap{total.components};
  for (const auto& r : per_sort)
    for (std::size_t c = 0; c < gap.dim(); ++c)
      for (std::size_t i = 0; i < gap[c].size(); ++i) gap[c][i] -= r.components[c][i];
  // Per-sort masks can differ from the total's; compare where all are valid.
  std::vector<Mask> masks{total.mask};
  for (const auto& r : per_sort) masks.push_back(r.mask);
  const auto m = merge_masks(masks);
  for (auto& comp : gap.components)
    for (std::size_t i = 0; i < comp.size(); ++i)
      if (m[i]) comp[i] = 0.0;
  const double g = l2_norm(gap, cell_volume);
  // Scale of the fields being summed; the total alone can be a near-cancellation.
  double scale = total.denominator, summed = 0.0;
  bool absolute = total.absolute;
  for (const auto& r : per_sort) {
    summed += r.denominator;
    absolute = absolute && r.absolute;
  }
  scale = std::max(scale, summed);
  return absolute || scale == 0.0 ? g : g / scale;
}

NonlinearityResult nonlinearity_demo(const GridCalculus& calculus, const HydroSlice& slice) {
  NonlinearityResult r;
  const double dv = slice.cell_volume;
  auto total = cauchy_residual(calculus, slice, std::nullopt);
  const auto& mask = slice.total_now.density_mask;
  VectorField sum = VectorField::zeros(total.lhs.dim(), total.lhs[0].size());
  std::vector<Residual> ehrenfest_parts;
  double spread = 0.0, scale = 0.0;
  for (std::size_t s = 0; s < slice.now.size(); ++s) {
    auto part = cauchy_residual(calculus, slice, s);
    sum = sum + part.lhs;
    ehrenfest_parts.push_back(ehrenfest_residual(calculus, slice, s));
    const auto& f = slice.now[s];
    VectorField dev = VectorField::zeros(f.velocity.dim(), f.mass_density.size());
    for (std::size_t c = 0; c < dev.dim(); ++c)
      for (std::size_t i = 0; i < dev[c].size(); ++i)
        dev[c][i] = f.mass_density[i] * (f.velocity[c][i] - slice.total_now.velocity[c][i]);
    spread += l2_norm(dev, dv, mask);
    scale += l2_norm(f.mass_current, dv, mask);
  }
  for (std::size_t c = 0; c < sum.dim(); ++c)
    for (std::size_t i = 0; i < sum[c].size(); ++i) sum[c][i] = mask[i] ? 0.0 : sum[c][i] - total.lhs[c][i];
  r.cauchy_gap = l2_norm(sum, dv);
  r.cauchy_residual = total.residual.absolute_norm;
  r.ratio = r.cauchy_residual > 0.0 ? r.cauchy_gap / r.cauchy_residual : INFINITY;
  r.ehrenfest_gap = total_sum_gap(ehrenfest_residual(calculus, slice, std::nullopt), ehrenfest_parts, dv);
  r.velocity_spread = scale > 0.0 ? spread / scale : 0.0;
  r.inconclusive = slice.now.size() < 2 || r.velocity_spread < 1e-6;
  return r;
}

// --- convergence ----------------------------------------------------------------

double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("order fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceTable convergence_study(const std::string& scenario, const std::string& equation,
                                   const std::string& parameter, const std::vector<double>& resolutions,
                                   const std::function<ConvergenceRow(double)>& evaluate, double floor) {
  if (resolutions.size() < 3) throw Error("a convergence study needs at least three resolutions");
  ConvergenceTable t{scenario, equation, parameter, {}, std::nullopt, {}};
  for (double r : resolutions) t.rows.push_back(evaluate(r));
  std::sort(t.rows.begin(), t.rows.end(),
            [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.step > b.step; });
  bool at_floor = true;
  for (const auto& row : t.rows) at_floor = at_floor && row.norm < floor;
  if (at_floor) {
    t.flags.push_back("at_floor");
    return t;
  }
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.rows[i].norm > t.rows[i - 1].norm) {
      t.flags.push_back("non_monotone");
      break;
    }
  std::vector<double> x, y;
  for (const auto& row : t.rows) {
    if (!(row.norm > 0.0)) continue;
    x.push_back(row.step);
    y.push_back(row.norm);
  }
  if (x.size() >= 2) t.order = fitted_order(x, y);
  return t;
}

// --- report -----------------------------------------------------------------------

void ResidualReport::add(ReportEntry e) { entries_.push_back(std::move(e)); }

void ResidualReport::add(const ConvergenceTable& table) { convergence_.push_back(table); }

void ResidualReport::sort() {
  std::stable_sort(entries_.begin(), entries_.end(), [](const ReportEntry& a, const ReportEntry& b) {
    return std::tie(a.scenario, a.equation, a.sort, a.resolution) <
           std::tie(b.scenario, b.equation, b.sort, b.resolution);
  });
  std::stable_sort(convergence_.begin(), convergence_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.scenario, a.equation, a.parameter) < std::tie(b.scenario, b.equation, b.parameter);
  });
}

bool ResidualReport::all_passed() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const ReportEntry& e) { return e.passed; });
}

std::string ResidualReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json root;
  root["entries"] = ordered_json::array();
  for (const auto& e : entries_) {
    ordered_json j;
    j["scenario"] = e.scenario;
    j["equation"] = e.equation;
    j["sort"] = e.sort;
    j["resolution"] = e.resolution;
    j["time"] = e.time;
    j["norm"] = e.norm;
    j["denominator"] = e.denominator;
    j["coverage"] = e.coverage;
    j["order"] = e.order ? ordered_json(*e.order) : ordered_json(nullptr);
    j["tolerance"] = e.tolerance;
    j["bound"] = e.lower_bound ? "lower" : "upper";
    j["passed"] = e.passed;
    j["flags"] = e.flags;
    root["entries"].push_back(std::move(j));
  }
  root["convergence"] = ordered_json::array();
  for (const auto& t : convergence_) {
    ordered_json j;
    j["scenario"] = t.scenario;
    j["equation"] = t.equation;
    j["parameter"] = t.parameter;
    j["order"] = t.order ? ordered_json(*t.order) : ordered_json(nullptr);
    j["flags"] = t.flags;
    j["rows"] = ordered_json::array();
    for (const auto& r : t.rows)
      j["rows"].push_back(ordered_json{{"resolution", r.resolution}, {"step", r.step}, {"norm", r.norm}});
    root["convergence"].push_back(std::move(j));
  }
  root["all_passed"] = all_passed();
  return root.dump(2) + "\n";
}

std::string ResidualReport::to_text() const {
  std::ostringstream os;
  os << std::left << std::setw(20) << "scenario" << std::setw(28) << "equation" << std::setw(10) << "sort"
     << std::setw(20) << "resolution" << std::right << std::setw(12) << "norm" << std::setw(12) << "tolerance"
     << std::setw(9) << "cover%" << "  result\n";
  for (const auto& e : entries_) {
    os << std::left << std::setw(20) << e.scenario << std::setw(28) << e.equation << std::setw(10) << e.sort
       << std::setw(20) << e.resolution << std::right << std::scientific << std::setprecision(3)
       << std::setw(12) << e.norm << std::setw(12) << e.tolerance << std::fixed << std::setprecision(1)
       << std::setw(9) << e.coverage << "  " << (e.passed ? "ok" : "FAIL");
    for (const auto& f : e.flags) os << " [" << f << "]";
    os << "\n";
  }
  for (const auto& t : convergence_) {
    os << "\nconvergence " << t.scenario << " / " << t.equation << " vs " << t.parameter << ":";
    if (t.order) os << " order " << std::fixed << std::setprecision(2) << *t.order;
    for (const auto& f : t.flags) os << " [" << f << "]";
    os << "\n";
    for (const auto& r : t.rows)
      os << "  " << t.parameter << "=" << std::defaultfloat << r.resolution << "  norm=" << std::scientific
         << std::setprecision(3) << r.norm << "\n";
  }
  return os.str();
}

Tolerances::Tolerances() {
  values_ = {
      {"qpot_forms", 1e-8},
      {"bm_continuity", 1e-5},
      {"eulerian_motion", 1e-4},
      {"force_identity", 1e-5},
      {"mpqhd_continuity", 1e-5},
      {"mpqhd_continuity_total_sum", 1e-12},
      {"ehrenfest", 1e-4},
      {"ehrenfest_total_sum", 1e-10},
      {"cauchy", 1e-4},
      {"cauchy_equivalence", 1e-10},
      {"nonsuperposition_cauchy", 10.0},
      {"nonsuperposition_ehrenfest", 1e-10},
      {"mass_sum_rule", 1e-9},
      {"pressure_integral", 1e-9},
      {"temporal_order", 0.3},
      {"boost_invariance", 1e-10},
      {"tensor_symmetry", 1e-12},
      {"trajectory_chi_square", 0.01},
      {"trajectory_ordering", 0.0},
  };
}

double Tolerances::get(const std::string& equation) const {
  auto it = values_.find(equation);
  if (it == values_.end()) throw Error("no tolerance configured for '" + equation + "'");
  return it->second;
}

void Tolerances::set(const std::string& equation, double value) {
  if (!values_.count(equation)) throw Error("unknown equation '" + equation + "' in tolerances");
  if (!(value >= 0.0)) throw Error("tolerance for '" + equation + "' must be non-negative");
  values_[equation] = value;
}

bool Tolerances::is_lower_bound(const std::string& equation) const {
  return equation == "nonsuperposition_cauchy" || equation == "trajectory_chi_square";
}

Tolerances Tolerances::from_json_text(const std::string& text) {
  Tolerances t;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("tolerances", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("tolerances", "expected an object of equation: value");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw SchemaError("tolerances." + key, "expected a number");
    try {
      t.set(key, value.get<double>());
    } catch (const Error& e) {
      throw SchemaError("tolerances." + key, e.what());
    }
  }
  return t;
}

ReportEntry judged(ReportEntry e, const Tolerances& tol) {
  e.tolerance = tol.get(e.equation);
  e.lower_bound = tol.is_lower_bound(e.equation);
  const bool inconclusive = std::find(e.flags.begin(), e.flags.end(), "inconclusive") != e.flags.end();
  if (inconclusive) {
    e.passed = true;
  } else if (e.lower_bound) {
    e.passed = e.norm >= e.tolerance;
  } else {
    e.passed = std::isfinite(e.norm) && e.norm <= e.tolerance;
  }
  return e;
}

}  // namespace qhd
