#pragma once

// Scenario → snapshot series → fields → residual report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qhd/bohm.hpp"
#include "qhd/mpqhd.hpp"
#include "qhd/scenario.hpp"
#include "qhd/verify.hpp"

namespace qhd {

/// Copy of `s` with the grid resolution and/or integration step replaced.
Scenario with_overrides(Scenario s, std::optional<std::size_t> points, std::optional<double> dt);

/// Snapshots t0, t0+Δt_snap, ... of the scenario, either sampled from the
/// closed form or split-operator propagated.
SnapshotSeries build_series(const Scenario& s);

/// Series for a custom snapshot cadence between t0 and t_end.
SnapshotSeries build_series(const Scenario& s, double spacing, std::size_t frames);

BohmOptions bohm_options(const Scenario& s);
MpqhdOptions mpqhd_options(const Scenario& s);

/// max |V_density − V_amplitude| / max |V_amplitude| over unmasked points.
double quantum_potential_form_gap(const GridCalculus& calculus, double hbar, const ComplexField& psi,
                                  BohmOptions options = {});

/// Largest relative change of the boost-invariant fields (ρ, P, Π_qu, f) and
/// largest deviation of j and Π_cl from their closed-form shifts when
/// particle (sort, 0) is given the periodic phase e^{i k q} along every axis
/// of its position, k = 2π·harmonic/L.
struct BoostCheck {
  double invariant_change = 0.0;
  double shift_error = 0.0;
};
BoostCheck boost_check(const GridCalculus& calculus, const Model& model, const WavefunctionSnapshot& snapshot,
                       std::size_t sort, int harmonic = 1, MpqhdOptions options = {});

/// Evaluates every balance equation and invariant at each interior snapshot
/// and appends the worst case per (equation, sort) to `report`.
void verify_series(const Scenario& s, const SnapshotSeries& series, const Tolerances& tol,
                   ResidualReport& report);

struct TrajectoryRun {
  SnapshotSeries series;
  TrajectoryBundle bundle;
  ChiSquareResult chi_square;
  bool ordering = true;
};

/// Requires s.trajectories. Appends the chi-square and ordering entries.
TrajectoryRun run_trajectories(const Scenario& s, std::uint64_t seed, const Tolerances& tol,
                               ResidualReport& report);

/// Requires s.convergence. Temporal study of BM continuity over the listed
/// snapshot spacings (judged against order 2) and a spatial study over the
/// listed grid sizes (reported only).
void run_convergence(const Scenario& s, const Tolerances& tol, ResidualReport& report);

std::string resolution_label(const Scenario& s);

}  // namespace qhd
