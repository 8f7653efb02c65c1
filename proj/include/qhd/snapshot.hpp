#pragma once

#include <vector>

#include "qhd/lattice.hpp"

namespace qhd {

/// Ψ(Q, t) sampled on a configuration grid.
struct WavefunctionSnapshot {
  double time = 0.0;
  ComplexField psi;
};

/// Time-ordered snapshots on one grid, uniformly spaced in time.
class SnapshotSeries {
 public:
  SnapshotSeries(ConfigurationGrid grid, double hbar) : grid_(std::move(grid)), hbar_(hbar) {}

  const ConfigurationGrid& grid() const noexcept { return grid_; }
  double hbar() const noexcept { return hbar_; }
  std::size_t size() const noexcept { return frames_.size(); }
  bool empty() const noexcept { return frames_.empty(); }
  const WavefunctionSnapshot& operator[](std::size_t i) const { return frames_.at(i); }
  const std::vector<WavefunctionSnapshot>& frames() const noexcept { return frames_; }

  /// Appends a frame; throws unless its size matches the grid and its time
  /// is later than the previous frame.
  void push_back(WavefunctionSnapshot s);

  /// Common spacing of the time stamps; throws qhd::Error when fewer than two
  /// frames exist or the spacings differ by more than 1e-9 relative.
  double time_step() const;

  /// Throws unless index has a neighbour on both sides.
  void require_interior(std::size_t index) const;

 private:
  ConfigurationGrid grid_;
  double hbar_;
  std::vector<WavefunctionSnapshot> frames_;
};

/// Σ |Ψ|² ΔV
double norm_squared(const ConfigurationGrid& grid, const ComplexField& psi);

}  // namespace qhd
