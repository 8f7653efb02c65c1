#include "qhd/snapshot.hpp"

#include <cmath>
#include <string>

#include "qhd/error.hpp"
#include "qhd/kernels.hpp"

namespace qhd {

void SnapshotSeries::push_back(WavefunctionSnapshot s) {
  if (s.psi.size() != grid_.size())
    throw Error("snapshot has " + std::to_string(s.psi.size()) + " values, grid has " +
                std::to_string(grid_.size()));
  if (!frames_.empty() && !(s.time > frames_.back().time))
    throw Error("snapshot times must increase strictly");
  frames_.push_back(std::move(s));
}

double SnapshotSeries::time_step() const {
  if (frames_.size() < 2) throw Error("a time step needs at least two snapshots");
  const double dt = frames_[1].time - frames_[0].time;
  for (std::size_t i = 2; i < frames_.size(); ++i) {
    const double h = frames_[i].time - frames_[i - 1].time;
    if (std::abs(h - dt) > 1e-9 * std::abs(dt))
      throw Error("snapshot times are not uniformly spaced (step " + std::to_string(i) + ")");
  }
  return dt;
}

void SnapshotSeries::require_interior(std::size_t index) const {
  if (frames_.size() < 3) throw Error("central time differences need at least three snapshots");
  if (index == 0 || index + 1 >= frames_.size())
    throw Error("snapshot index " + std::to_string(index) + " has no neighbour on both sides");
}

double norm_squared(const ConfigurationGrid& grid, const ComplexField& psi) {
  ScalarField d(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) d[i] = std::norm(psi[i]);
  return kernels::parallel::sum(d) * grid.lattice().cell_volume();
}

}  // namespace qhd
