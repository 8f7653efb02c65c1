#include "qhd/lattice.hpp"

#include <cmath>
#include <numeric>

#include "qhd/error.hpp"
#include "qhd/kernels.hpp"

namespace qhd {

void validate(const AxisSpec& axis) {
  if (!(axis.max > axis.min) || !std::isfinite(axis.min) || !std::isfinite(axis.max)) {
    throw Error("axis extent must satisfy min < max");
  }
  if (axis.points < 4 || (axis.points & (axis.points - 1)) != 0) {
    throw Error("axis point count must be a power of two >= 4, got " +
                std::to_string(axis.points));
  }
}

Lattice::Lattice(AxisSpec axis, std::size_t rank) : axis_(axis), rank_(rank) {
  validate(axis_);
  if (rank_ == 0) throw Error("lattice rank must be positive");
  strides_.assign(rank_, 1);
  for (std::size_t a = rank_ - 1; a > 0; --a) strides_[a - 1] = strides_[a] * axis_.points;
  size_ = strides_[0] * axis_.points;
  cell_volume_ = std::pow(axis_.spacing(), static_cast<double>(rank_));
}

ConfigurationGrid::ConfigurationGrid(std::vector<SortLayout> sorts, std::size_t spatial_dim,
                                     AxisSpec axis, std::size_t axis_cap)
    : sorts_(std::move(sorts)), spatial_dim_(spatial_dim) {
  if (sorts_.empty()) throw Error("at least one particle sort is required");
  if (spatial_dim_ < 1 || spatial_dim_ > 3) throw Error("spatial dimension must be 1, 2 or 3");
  for (std::size_t s = 0; s < sorts_.size(); ++s) {
    const auto& sort = sorts_[s];
    if (sort.count < 1) throw Error("sort '" + sort.label + "' must contain at least one particle");
    if (!(sort.mass > 0.0) || !std::isfinite(sort.mass)) {
      throw Error("sort '" + sort.label + "' must have a positive mass");
    }
    for (std::size_t r = 0; r < s; ++r) {
      if (sorts_[r].label == sort.label) throw Error("duplicate sort label '" + sort.label + "'");
    }
    sort_offsets_.push_back(particle_count_);
    particle_count_ += sort.count;
  }
  const std::size_t axes = particle_count_ * spatial_dim_;
  if (axes > axis_cap) {
    throw Error("configuration space has " + std::to_string(axes) + " axes, above the cap of " +
                std::to_string(axis_cap));
  }
  lattice_ = Lattice(axis, axes);
  position_lattice_ = Lattice(axis, spatial_dim_);
}

std::size_t ConfigurationGrid::particle_ordinal(ParticleIndex p) const {
  if (p.sort >= sorts_.size() || p.index >= sorts_[p.sort].count) {
    throw Error("unknown particle index (sort " + std::to_string(p.sort) + ", index " +
                std::to_string(p.index) + ")");
  }
  return sort_offsets_[p.sort] + p.index;
}

ParticleIndex ConfigurationGrid::particle_of_axis(std::size_t axis) const {
  if (axis >= axis_count()) throw Error("axis " + std::to_string(axis) + " out of range");
  const std::size_t ordinal = axis / spatial_dim_;
  std::size_t s = sorts_.size() - 1;
  while (sort_offsets_[s] > ordinal) --s;
  return {s, ordinal - sort_offsets_[s]};
}

std::vector<ParticleIndex> ConfigurationGrid::particles() const {
  std::vector<ParticleIndex> out;
  out.reserve(particle_count_);
  for (std::size_t s = 0; s < sorts_.size(); ++s)
    for (std::size_t i = 0; i < sorts_[s].count; ++i) out.push_back({s, i});
  return out;
}

bool ConfigurationGrid::operator==(const ConfigurationGrid& other) const {
  if (spatial_dim_ != other.spatial_dim_ || !(lattice_ == other.lattice_) ||
      sorts_.size() != other.sorts_.size())
    return false;
  for (std::size_t s = 0; s < sorts_.size(); ++s) {
    if (sorts_[s].label != other.sorts_[s].label || sorts_[s].count != other.sorts_[s].count ||
        sorts_[s].mass != other.sorts_[s].mass)
      return false;
  }
  return true;
}

double l2_norm(std::span<const double> f, double cell_volume, std::span<const std::uint8_t> mask) {
  return std::sqrt(kernels::parallel::sum_squares(f, mask) * cell_volume);
}

double l2_norm(const VectorField& v, double cell_volume, std::span<const std::uint8_t> mask) {
  double total = 0.0;
  for (const auto& c : v.components) total += kernels::parallel::sum_squares(c, mask);
  return std::sqrt(total * cell_volume);
}

double integrate(std::span<const double> f, double cell_volume) {
  return kernels::parallel::sum(f) * cell_volume;
}

}  // namespace qhd
