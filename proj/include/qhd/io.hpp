#pragma once

// Binary field files (byte layout in docs/formats.md) and CSV exports.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qhd/bohm.hpp"
#include "qhd/lattice.hpp"
#include "qhd/mpqhd.hpp"
#include "qhd/snapshot.hpp"

namespace qhd {

enum class ValueKind : std::uint32_t { complex64 = 1, complex128 = 2, float64 = 3 };

/// Contents of one field file. `values[frame]` holds components interleaved
/// fastest (and re, im for complex kinds) over the lattice in row-major order,
/// always widened to double.
struct FieldFile {
  ValueKind kind = ValueKind::complex128;
  std::uint32_t components = 1;
  std::vector<SortLayout> sorts;
  std::uint32_t spatial_dim = 1;
  double hbar = 1.0;
  AxisSpec axis;
  std::uint32_t axis_count = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  std::size_t values_per_point() const;
  std::size_t lattice_size() const;
};

inline constexpr char field_magic[8] = {'Q', 'H', 'D', 'F', 'I', 'E', 'L', 'D'};
inline constexpr std::uint32_t byte_order_mark = 0x01020304u;
inline constexpr std::uint32_t field_format_version = 1;

void write_field_file(std::ostream& out, const FieldFile& file);
/// Throws FormatError on a bad magic, foreign byte order, unknown version or
/// kind, or a truncated body.
FieldFile read_field_file(std::istream& in);

void write_field_file(const std::string& path, const FieldFile& file);
FieldFile read_field_file(const std::string& path);

/// Wavefunction series <-> field file. complex64 storage rounds amplitudes.
FieldFile to_field_file(const SnapshotSeries& series, ValueKind kind = ValueKind::complex128);
/// Rebuilds the series; throws FormatError if the file is not a one-component
/// complex configuration-space file and Error if time stamps are not uniform.
SnapshotSeries to_series(const FieldFile& file);

void save_series(const std::string& path, const SnapshotSeries& series,
                 ValueKind kind = ValueKind::complex128);
SnapshotSeries load_series(const std::string& path);

/// Per-sort hydrodynamic fields on the position lattice as a float64 file
/// with components ρ, j, v, P, Π, f, f_qu, p (tensors row-major).
FieldFile hydro_field_file(const ConfigurationGrid& grid, double hbar,
                           const std::vector<MpqhdFieldSet>& frames);

// --- CSV --------------------------------------------------------------------------

/// Columns t,id,q0..q{d-1},flag; one row per trajectory and stored time.
void write_trajectories_csv(std::ostream& out, const TrajectoryBundle& bundle);

/// Columns q0.., D, w_<axis>.., u_<axis>.., Vqu for one configuration-space snapshot.
void write_bohm_csv(std::ostream& out, const ConfigurationGrid& grid, const BohmFieldSet& fields);

/// Columns q0.., rho, j_*, v_*, P, Pi_**, f_*, fqu_*, p_** for one sort.
void write_hydro_csv(std::ostream& out, const ConfigurationGrid& grid, const MpqhdFieldSet& fields);

}  // namespace qhd
