#pragma once

// Periodic tensor-product grids for configuration space and single-particle
// position space, plus the field carriers that live on them.

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qhd {

using ScalarField = std::vector<double>;
using ComplexField = std::vector<std::complex<double>>;

/// One component per spatial direction, each a full grid array.
struct VectorField {
  std::vector<ScalarField> components;

  static VectorField zeros(std::size_t dim, std::size_t size) {
    return VectorField{std::vector<ScalarField>(dim, ScalarField(size, 0.0))};
  }
  std::size_t dim() const noexcept { return components.size(); }
  ScalarField& operator[](std::size_t c) { return components[c]; }
  const ScalarField& operator[](std::size_t c) const { return components[c]; }
};

/// Row-major ν×ν matrix of grid arrays.
struct Tensor2Field {
  std::size_t dim = 0;
  std::vector<ScalarField> entries;

  static Tensor2Field zeros(std::size_t dim, std::size_t size) {
    return Tensor2Field{dim, std::vector<ScalarField>(dim * dim, ScalarField(size, 0.0))};
  }
  ScalarField& operator()(std::size_t a, std::size_t b) { return entries[a * dim + b]; }
  const ScalarField& operator()(std::size_t a, std::size_t b) const { return entries[a * dim + b]; }
};

/// Extent and resolution shared by every axis of a lattice. Points sit at
/// min + i·spacing, i = 0..points-1; the box is periodic with period max-min.
struct AxisSpec {
  double min = -1.0;
  double max = 1.0;
  std::size_t points = 0;

  double length() const noexcept { return max - min; }
  double spacing() const noexcept { return length() / static_cast<double>(points); }
  double coordinate(std::size_t i) const noexcept { return min + static_cast<double>(i) * spacing(); }
  bool operator==(const AxisSpec&) const = default;
};

/// Throws qhd::Error unless points is a power of two >= 4 and max > min.
void validate(const AxisSpec& axis);

/// A rank-d periodic lattice, row-major with axis 0 slowest.
class Lattice {
 public:
  Lattice() = default;
  Lattice(AxisSpec axis, std::size_t rank);

  const AxisSpec& axis() const noexcept { return axis_; }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t points_per_axis() const noexcept { return axis_.points; }
  std::size_t size() const noexcept { return size_; }
  std::size_t stride(std::size_t a) const { return strides_.at(a); }
  std::size_t index_along(std::size_t flat, std::size_t a) const noexcept {
    return (flat / strides_[a]) % axis_.points;
  }
  double coordinate(std::size_t flat, std::size_t a) const noexcept {
    return axis_.coordinate(index_along(flat, a));
  }
  /// Midpoint-rule volume element spacing^rank.
  double cell_volume() const noexcept { return cell_volume_; }

  bool operator==(const Lattice& other) const noexcept {
    return axis_ == other.axis_ && rank_ == other.rank_;
  }

 private:
  AxisSpec axis_{};
  std::size_t rank_ = 0;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
  std::vector<std::size_t> strides_;
};

struct SortLayout {
  std::string label;
  std::size_t count = 1;
  double mass = 1.0;
};

/// (sort, index) label of one particle; both zero-based.
struct ParticleIndex {
  std::size_t sort = 0;
  std::size_t index = 0;
  auto operator<=>(const ParticleIndex&) const = default;
};

/// Configuration space Q = (q_1^1 .. q_N(1)^1, q_1^2, ..., q_N(Ns)^Ns), each
/// particle owning a contiguous block of ν axes.
class ConfigurationGrid {
 public:
  static constexpr std::size_t default_axis_cap = 4;

  ConfigurationGrid(std::vector<SortLayout> sorts, std::size_t spatial_dim, AxisSpec axis,
                    std::size_t axis_cap = default_axis_cap);

  const std::vector<SortLayout>& sorts() const noexcept { return sorts_; }
  const SortLayout& sort(std::size_t s) const { return sorts_.at(s); }
  std::size_t sort_count() const noexcept { return sorts_.size(); }
  std::size_t spatial_dim() const noexcept { return spatial_dim_; }
  std::size_t particle_count() const noexcept { return particle_count_; }
  std::size_t axis_count() const noexcept { return lattice_.rank(); }
  std::size_t size() const noexcept { return lattice_.size(); }

  const Lattice& lattice() const noexcept { return lattice_; }
  /// ν-dimensional lattice of a single position vector q.
  const Lattice& position_lattice() const noexcept { return position_lattice_; }

  /// Position of the particle in Q-order; throws on an unknown index.
  std::size_t particle_ordinal(ParticleIndex p) const;
  std::size_t first_axis(ParticleIndex p) const { return particle_ordinal(p) * spatial_dim_; }
  ParticleIndex particle_of_axis(std::size_t axis) const;
  double axis_mass(std::size_t axis) const { return sorts_[particle_of_axis(axis).sort].mass; }
  std::vector<ParticleIndex> particles() const;

  bool operator==(const ConfigurationGrid& other) const;

 private:
  std::vector<SortLayout> sorts_;
  std::size_t spatial_dim_;
  std::size_t particle_count_ = 0;
  std::vector<std::size_t> sort_offsets_;
  Lattice lattice_;
  Lattice position_lattice_;
};

/// Midpoint-rule L2 norm sqrt(Σ f² ΔV), optionally skipping masked points.
double l2_norm(std::span<const double> f, double cell_volume,
               std::span<const std::uint8_t> mask = {});
double l2_norm(const VectorField& v, double cell_volume, std::span<const std::uint8_t> mask = {});
double integrate(std::span<const double> f, double cell_volume);

}  // namespace qhd
