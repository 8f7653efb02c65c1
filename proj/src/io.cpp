#include "qhd/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <istream>

#include "qhd/error.hpp"

namespace qhd {

namespace {

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T get(const char* what) {
    T value{};
    bytes(reinterpret_cast<char*>(&value), sizeof(T), what);
    return value;
  }

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw FormatError(std::string("truncated field file: expected ") + std::to_string(n) +
                        " more bytes for " + what + " at offset " + std::to_string(offset_) + ", found " +
                        std::to_string(in_.gcount()));
    offset_ += n;
  }

  std::string string(const char* what) {
    const auto n = get<std::uint32_t>(what);
    if (n > 4096) throw FormatError(std::string("implausible string length for ") + what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
};

std::uint32_t byteswap32(std::uint32_t x) {
  return ((x & 0xffu) << 24) | ((x & 0xff00u) << 8) | ((x >> 8) & 0xff00u) | (x >> 24);
}

std::string axis_suffix(std::size_t a) { return std::to_string(a); }

void write_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << row[i];
  }
  out << '\n';
}

}  // namespace

std::size_t FieldFile::values_per_point() const {
  const std::size_t scalars = kind == ValueKind::float64 ? 1 : 2;
  return scalars * components;
}

std::size_t FieldFile::lattice_size() const {
  std::size_t n = 1;
  for (std::uint32_t a = 0; a < axis_count; ++a) n *= axis.points;
  return n;
}

void write_field_file(std::ostream& out, const FieldFile& f) {
  const std::size_t expected = f.lattice_size() * f.values_per_point();
  if (f.times.size() != f.values.size()) throw Error("field file: one time stamp per frame required");
  out.write(field_magic, sizeof(field_magic));
  put<std::uint32_t>(out, byte_order_mark);
  put<std::uint32_t>(out, field_format_version);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.kind));
  put<std::uint32_t>(out, f.components);
  put<std::uint32_t>(out, f.spatial_dim);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.sorts.size()));
  put<double>(out, f.hbar);
  put<double>(out, f.axis.min);
  put<double>(out, f.axis.max);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.axis.points));
  put<std::uint32_t>(out, f.axis_count);
  for (const auto& s : f.sorts) {
    put_string(out, s.label);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.count));
    put<double>(out, s.mass);
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.values.size()));
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (f.values[k].size() != expected)
      throw Error("field file: frame " + std::to_string(k) + " has the wrong number of values");
    put<double>(out, f.times[k]);
    if (f.kind == ValueKind::complex64) {
      std::vector<float> narrow(f.values[k].begin(), f.values[k].end());
      out.write(reinterpret_cast<const char*>(narrow.data()),
                static_cast<std::streamsize>(narrow.size() * sizeof(float)));
    } else {
      out.write(reinterpret_cast<const char*>(f.values[k].data()),
                static_cast<std::streamsize>(f.values[k].size() * sizeof(double)));
    }
  }
  if (!out) throw Error("field file: write failed");
}

FieldFile read_field_file(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, field_magic, sizeof(magic)) != 0) throw FormatError("not a QHDFIELD file (bad magic)");
  const auto bom = r.get<std::uint32_t>("byte-order mark");
  if (bom == byteswap32(byte_order_mark))
    throw FormatError("field file was written with foreign byte order; convert it on the producing machine");
  if (bom != byte_order_mark) throw FormatError("corrupt byte-order mark");
  const auto version = r.get<std::uint32_t>("version");
  if (version != field_format_version) throw FormatError("unsupported field file version " + std::to_string(version));
  FieldFile f;
  const auto kind = r.get<std::uint32_t>("value kind");
  if (kind < 1 || kind > 3) throw FormatError("unknown value kind " + std::to_string(kind));
  f.kind = static_cast<ValueKind>(kind);
  f.components = r.get<std::uint32_t>("component count");
  if (f.components == 0) throw FormatError("component count must be positive");
  f.spatial_dim = r.get<std::uint32_t>("spatial dimension");
  const auto sorts = r.get<std::uint32_t>("sort count");
  if (sorts > 64) throw FormatError("implausible sort count");
  f.hbar = r.get<double>("hbar");
  f.axis.min = r.get<double>("axis min");
  f.axis.max = r.get<double>("axis max");
  f.axis.points = r.get<std::uint32_t>("axis points");
  f.axis_count = r.get<std::uint32_t>("axis count");
  try {
    validate(f.axis);
  } catch (const Error& e) {
    throw FormatError(std::string("bad axis in field file: ") + e.what());
  }
  if (f.axis_count == 0 || f.axis_count > 8) throw FormatError("implausible axis count");
  for (std::uint32_t s = 0; s < sorts; ++s) {
    SortLayout l;
    l.label = r.string("sort label");
    l.count = r.get<std::uint32_t>("sort count");
    l.mass = r.get<double>("sort mass");
    f.sorts.push_back(l);
  }
  const auto frames = r.get<std::uint32_t>("frame count");
  const std::size_t n = f.lattice_size() * f.values_per_point();
  for (std::uint32_t k = 0; k < frames; ++k) {
    f.times.push_back(r.get<double>("frame time"));
    std::vector<double> values(n);
    if (f.kind == ValueKind::complex64) {
      std::vector<float> narrow(n);
      r.bytes(reinterpret_cast<char*>(narrow.data()), n * sizeof(float), "frame values");
      std::copy(narrow.begin(), narrow.end(), values.begin());
    } else {
      r.bytes(reinterpret_cast<char*>(values.data()), n * sizeof(double), "frame values");
    }
    f.values.push_back(std::move(values));
  }
  return f;
}

void write_field_file(const std::string& path, const FieldFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_field_file(out, file);
}

FieldFile read_field_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_field_file(in);
}

FieldFile to_field_file(const SnapshotSeries& series, ValueKind kind) {
  if (kind == ValueKind::float64) throw Error("wavefunctions need a complex value kind");
  const auto& grid = series.grid();
  FieldFile f;
  f.kind = kind;
  f.components = 1;
  f.sorts = grid.sorts();
  f.spatial_dim = static_cast<std::uint32_t>(grid.spatial_dim());
  f.hbar = series.hbar();
  f.axis = grid.lattice().axis();
  f.axis_count = static_cast<std::uint32_t>(grid.axis_count());
  for (const auto& frame : series.frames()) {
    f.times.push_back(frame.time);
    std::vector<double> v(2 * frame.psi.size());
    for (std::size_t i = 0; i < frame.psi.size(); ++i) {
      v[2 * i] = frame.psi[i].real();
      v[2 * i + 1] = frame.psi[i].imag();
    }
    f.values.push_back(std::move(v));
  }
  return f;
}

SnapshotSeries to_series(const FieldFile& f) {
  if (f.kind == ValueKind::float64 || f.components != 1)
    throw FormatError("expected a one-component complex wavefunction file");
  std::size_t axes = 0;
  for (const auto& l : f.sorts) axes += l.count * f.spatial_dim;
  if (f.sorts.empty() || axes != f.axis_count)
    throw FormatError("shape mismatch: sorts and spatial dimension give " + std::to_string(axes) +
                      " axes, header says " + std::to_string(f.axis_count));
  SnapshotSeries series(ConfigurationGrid(f.sorts, f.spatial_dim, f.axis, f.axis_count), f.hbar);
  const auto& grid = series.grid();
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    WavefunctionSnapshot s;
    s.time = f.times[k];
    s.psi.resize(grid.size());
    for (std::size_t i = 0; i < s.psi.size(); ++i) s.psi[i] = {f.values[k][2 * i], f.values[k][2 * i + 1]};
    series.push_back(std::move(s));
  }
  if (series.size() >= 2) series.time_step();
  return series;
}

void save_series(const std::string& path, const SnapshotSeries& series, ValueKind kind) {
  write_field_file(path, to_field_file(series, kind));
}

SnapshotSeries load_series(const std::string& path) { return to_series(read_field_file(path)); }

FieldFile hydro_field_file(const ConfigurationGrid& grid, double hbar, const std::vector<MpqhdFieldSet>& frames) {
  const std::size_t nu = grid.spatial_dim();
  FieldFile f;
  f.kind = ValueKind::float64;
  f.components = static_cast<std::uint32_t>(1 + nu + nu + 1 + nu * nu + nu + nu + nu * nu);
  f.sorts = grid.sorts();
  f.spatial_dim = static_cast<std::uint32_t>(nu);
  f.hbar = hbar;
  f.axis = grid.position_lattice().axis();
  f.axis_count = static_cast<std::uint32_t>(nu);
  const std::size_t n = grid.position_lattice().size();
  for (const auto& s : frames) {
    std::vector<const ScalarField*> cols{&s.mass_density};
    for (const auto& c : s.mass_current.components) cols.push_back(&c);
    for (const auto& c : s.velocity.components) cols.push_back(&c);
    cols.push_back(&s.pressure);
    for (const auto& c : s.flow.entries) cols.push_back(&c);
    for (const auto& c : s.force.components) cols.push_back(&c);
    for (const auto& c : s.quantum_force.components) cols.push_back(&c);
    for (const auto& c : s.pressure_tensor.entries) cols.push_back(&c);
    std::vector<double> v(n * cols.size());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < cols.size(); ++c) v[i * cols.size() + c] = (*cols[c])[i];
    f.times.push_back(s.time);
    f.values.push_back(std::move(v));
  }
  return f;
}

void write_trajectories_csv(std::ostream& out, const TrajectoryBundle& b) {
  out << std::setprecision(17) << "t,id";
  for (std::size_t a = 0; a < b.axis_count; ++a) out << ",q" << axis_suffix(a);
  out << ",flag\n";
  for (std::size_t k = 0; k < b.times.size(); ++k)
    for (std::size_t j = 0; j < b.count(); ++j) {
      out << b.times[k] << ',' << j;
      for (std::size_t a = 0; a < b.axis_count; ++a) out << ',' << b.position(j, k, a);
      const bool flagged = b.flags[j] != TrajectoryFlag::ok && k >= b.flagged_at[j];
      out << ',' << (flagged ? static_cast<int>(b.flags[j]) : 0) << '\n';
    }
}

void write_bohm_csv(std::ostream& out, const ConfigurationGrid& grid, const BohmFieldSet& f) {
  const std::size_t d = grid.axis_count();
  const std::size_t nu = grid.spatial_dim();
  out << std::setprecision(17);
  for (std::size_t a = 0; a < d; ++a) out << "q" << a << ',';
  out << "D";
  for (std::size_t a = 0; a < d; ++a) out << ",w" << a;
  for (std::size_t a = 0; a < d; ++a) out << ",u" << a;
  out << ",Vqu\n";
  const auto& lat = grid.lattice();
  std::vector<double> row;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    row.clear();
    for (std::size_t a = 0; a < d; ++a) row.push_back(lat.coordinate(i, a));
    row.push_back(f.density[i]);
    for (std::size_t a = 0; a < d; ++a) row.push_back(f.velocity[a / nu][a % nu][i]);
    for (std::size_t a = 0; a < d; ++a) row.push_back(f.osmotic[a / nu][a % nu][i]);
    row.push_back(f.quantum_potential[i]);
    write_row(out, row);
  }
}

void write_hydro_csv(std::ostream& out, const ConfigurationGrid& grid, const MpqhdFieldSet& s) {
  const std::size_t nu = grid.spatial_dim();
  out << std::setprecision(17);
  for (std::size_t a = 0; a < nu; ++a) out << "q" << a << ',';
  out << "rho";
  for (std::size_t a = 0; a < nu; ++a) out << ",j" << a;
  for (std::size_t a = 0; a < nu; ++a) out << ",v" << a;
  out << ",P";
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = 0; b < nu; ++b) out << ",Pi" << a << b;
  for (std::size_t a = 0; a < nu; ++a) out << ",f" << a;
  for (std::size_t a = 0; a < nu; ++a) out << ",fqu" << a;
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = 0; b < nu; ++b) out << ",p" << a << b;
  out << '\n';
  const auto& lat = grid.position_lattice();
  std::vector<double> row;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    row.clear();
    for (std::size_t a = 0; a < nu; ++a) row.push_back(lat.coordinate(i, a));
    row.push_back(s.mass_density[i]);
    for (const auto& c : s.mass_current.components) row.push_back(c[i]);
    for (const auto& c : s.velocity.components) row.push_back(c[i]);
    row.push_back(s.pressure[i]);
    for (const auto& c : s.flow.entries) row.push_back(c[i]);
    for (const auto& c : s.force.components) row.push_back(c[i]);
    for (const auto& c : s.quantum_force.components) row.push_back(c[i]);
    for (const auto& c : s.pressure_tensor.entries) row.push_back(c[i]);
    write_row(out, row);
  }
}

}  // namespace qhd
