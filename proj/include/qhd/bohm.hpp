#pragma once

// Bohmian fields on configuration space, the two configuration-space balance
// equations, and trajectory integration.
//
// Nothing here unwraps the phase S. Velocities, osmotic velocities and the
// quantum potential are built from Im/Re(∂Ψ/Ψ) and |Ψ|², which are local and
// well-defined away from nodes.

#include <cstdint>
#include <optional>
#include <vector>

#include "qhd/calculus.hpp"
#include "qhd/model.hpp"
#include "qhd/residual.hpp"
#include "qhd/snapshot.hpp"

namespace qhd {

/// Per-particle vectors are indexed by particle ordinal (Q-order). Entries
/// under node_mask hold NaN in velocity, osmotic, momentum and
/// quantum_potential; density and current are finite everywhere.
struct BohmFieldSet {
  double time = 0.0;
  ScalarField density;
  std::vector<VectorField> velocity;
  std::vector<VectorField> current;
  std::vector<VectorField> osmotic;
  std::vector<VectorField> momentum;
  ScalarField quantum_potential;
  Mask node_mask;
  double coverage = 100.0;
};

struct BohmOptions {
  double node_fraction = 1e-10;      // ε_node = node_fraction · max D
  double mask_warning_fraction = 0.2;
};

ScalarField density(std::span<const cplx> psi);

/// Lazily evaluated Bohmian quantities of one snapshot.
class BohmAnalysis {
 public:
  BohmAnalysis(const GridCalculus& calculus, double hbar, std::span<const cplx> psi,
               BohmOptions options = {});

  const ScalarField& density() const noexcept { return density_; }
  const Mask& mask() const noexcept { return mask_; }
  double coverage() const noexcept { return coverage_percent(mask_); }
  /// More than mask_warning_fraction of the grid is masked.
  bool mask_warning() const noexcept;

  VectorField velocity(ParticleIndex target);
  VectorField current(ParticleIndex target);
  VectorField osmotic_velocity(ParticleIndex target);
  VectorField momentum(ParticleIndex target);

  /// w along one configuration axis, NaN on the mask.
  ScalarField axis_velocity(std::size_t axis);
  /// ∂_b w_α, NaN on the mask.
  ScalarField velocity_derivative(std::size_t alpha, std::size_t b);

  /// −Σ ħ²/4m [ΔD/D − (∇D)²/2D²], with ∇D and ΔD formed from Ψ's derivatives.
  ScalarField quantum_potential();
  /// −Σ ħ²/2m Δa/a with Δa/a = Re(ΔΨ/Ψ) + (Im ∇Ψ/Ψ)².
  ScalarField quantum_potential_amplitude_form();
  /// ∂V_qu/∂Q_α from third derivatives of Ψ, NaN on the mask.
  ScalarField quantum_potential_derivative(std::size_t alpha);

  BohmFieldSet fields();

  const GridCalculus& calculus() const noexcept { return calc_; }
  DerivativeJet& jet() noexcept { return jet_; }

 private:
  double mass_of(std::size_t axis) const { return calc_.grid().axis_mass(axis); }

  const GridCalculus& calc_;
  double hbar_;
  BohmOptions options_;
  DerivativeJet jet_;
  ScalarField density_;
  Mask mask_;
};

/// The density form evaluated purely from D with spectral derivatives of D.
/// Loses accuracy where D is small; kept as an independent cross-check.
ScalarField quantum_potential_from_density(const GridCalculus& calculus, double hbar,
                                           std::span<const double> density, const Mask& mask);

/// r = ∂_t D + Σ ∇·J at series[index], central difference in time.
/// Terms: "dD/dt", "div J".
Residual bm_continuity_residual(const GridCalculus& calculus, const SnapshotSeries& series,
                                std::size_t index, BohmOptions options = {});

/// m_A[∂_t w + Σ_b w_b ∂_b w] + ∇(V_qu + V) on the target's axes.
/// Terms: "m dw/dt", "m (w.grad)w", "grad Vqu", "grad V".
Residual eulerian_motion_residual(const GridCalculus& calculus, const SnapshotSeries& series,
                                  const Potential& potential, std::size_t index,
                                  ParticleIndex target, BohmOptions options = {});

// --- trajectories -------------------------------------------------------------

enum class TrajectoryFlag : std::uint8_t { ok = 0, exited = 1, node = 2 };

struct TrajectoryBundle {
  std::vector<double> times;
  std::size_t axis_count = 0;
  /// positions[traj][step·axis_count + axis]; frozen after a flag is raised.
  std::vector<std::vector<double>> positions;
  std::vector<double> weights;
  std::vector<TrajectoryFlag> flags;
  std::vector<std::size_t> flagged_at;  // time index of the flag, or times.size()

  std::size_t count() const noexcept { return positions.size(); }
  double position(std::size_t traj, std::size_t step, std::size_t axis) const {
    return positions[traj][step * axis_count + axis];
  }
};

/// Seeds drawn from D by inverse CDF over grid cells, jittered uniformly
/// within the chosen cell. Deterministic for a given seed.
std::vector<std::vector<double>> sample_seeds(const ConfigurationGrid& grid,
                                              std::span<const double> density, std::size_t count,
                                              std::uint64_t seed);

struct TrajectoryOptions {
  std::size_t substeps = 2;  // RK4 steps per snapshot interval
  BohmOptions bohm;
};

/// RK4 through the velocity field of `series`, multilinear in space and
/// linear in time between snapshots.
TrajectoryBundle integrate_trajectories(const GridCalculus& calculus, const SnapshotSeries& series,
                                        const std::vector<std::vector<double>>& seeds,
                                        TrajectoryOptions options = {});

/// In a 1D single-particle bundle, the order of unflagged trajectories is the
/// same at every stored time.
bool ordering_preserved(const TrajectoryBundle& bundle);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t bins = 0;
  std::size_t dof = 0;
  double p_value = 0.0;
};

/// Pearson test of trajectory positions at `step` against density D on bins
/// of `cells_per_bin` grid cells per axis. Bins with expected count < 5 are
/// pooled into one.
ChiSquareResult density_chi_square(const ConfigurationGrid& grid, std::span<const double> density,
                                   const TrajectoryBundle& bundle, std::size_t step,
                                   std::size_t cells_per_bin = 1);

}  // namespace qhd
