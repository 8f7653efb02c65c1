#include <cstring>
#include <sstream>

#include "doctest.h"
#include "qhd/error.hpp"
#include "qhd/io.hpp"
#include "qhd/mpqhd.hpp"
#include "qhd/states.hpp"
#include "support.hpp"

using namespace qhd;

namespace {

SnapshotSeries small_series() {
  ConfigurationGrid g({{"e", 1, 1.0}, {"nuc", 1, 7.5}}, 1, AxisSpec{-16, 16, 32});
  const auto m = testing::free_model(g, 0.9);
  StateSpec spec{{testing::gaussian(-1, 1, 0.3), testing::gaussian(1, 0.9, -0.2)}, {}};
  SnapshotSeries s(g, 0.9);
  for (int k = 0; k < 3; ++k) s.push_back(sample_state(spec, m, 0.1 + 0.05 * k));
  return s;
}

std::string bytes_of(const FieldFile& f) {
  std::ostringstream os(std::ios::binary);
  write_field_file(os, f);
  return os.str();
}

FieldFile parse(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_field_file(is);
}

}  // namespace

TEST_CASE("complex128 round trip is bitwise exact") {
  const auto s = small_series();
  const auto bytes = bytes_of(to_field_file(s));
  const auto back = to_series(parse(bytes));
  REQUIRE(back.size() == s.size());
  CHECK(back.grid() == s.grid());
  CHECK(back.hbar() == 0.9);
  CHECK(back.grid().sort(1).label == "nuc");
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(back[k].time == s[k].time);
    CHECK(std::memcmp(back[k].psi.data(), s[k].psi.data(), s[k].psi.size() * sizeof(cplx)) == 0);
  }
  CHECK(bytes_of(to_field_file(back)) == bytes);
}

TEST_CASE("complex64 storage rounds to float") {
  const auto s = small_series();
  const auto back = to_series(parse(bytes_of(to_field_file(s, ValueKind::complex64))));
  for (std::size_t i = 0; i < s[1].psi.size(); ++i) {
    CHECK(back[1].psi[i].real() == static_cast<double>(static_cast<float>(s[1].psi[i].real())));
    CHECK(back[1].psi[i].imag() == static_cast<double>(static_cast<float>(s[1].psi[i].imag())));
  }
}

TEST_CASE("malformed files are rejected") {
  const auto bytes = bytes_of(to_field_file(small_series()));
  SUBCASE("truncated") {
    for (std::size_t cut : {4u, 20u, 60u}) CHECK_THROWS_AS(parse(bytes.substr(0, cut)), FormatError);
    CHECK_THROWS_AS(parse(bytes.substr(0, bytes.size() - 1)), FormatError);
  }
  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    CHECK_THROWS_AS(parse(b), FormatError);
  }
  SUBCASE("foreign byte order") {
    auto b = bytes;
    std::swap(b[8], b[11]);
    std::swap(b[9], b[10]);
    try {
      parse(b);
      FAIL("accepted a byteswapped file");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("byte order") != std::string::npos);
    }
  }
  SUBCASE("unknown version") {
    auto b = bytes;
    b[12] = 9;
    CHECK_THROWS_AS(parse(b), FormatError);
  }
}

TEST_CASE("series reconstruction checks shape and time stamps") {
  auto f = to_field_file(small_series());
  auto uneven = f;
  uneven.times[2] += 0.01;
  CHECK_THROWS_AS(to_series(uneven), Error);
  auto wrong = f;
  wrong.axis_count = 3;
  CHECK_THROWS_AS(to_series(wrong), FormatError);
  auto real = f;
  real.kind = ValueKind::float64;
  CHECK_THROWS_AS(to_series(real), FormatError);
}

TEST_CASE("csv headers") {
  const auto s = small_series();
  GridCalculus calc(s.grid());
  BohmAnalysis a(calc, s.hbar(), s[1].psi);
  std::ostringstream bohm;
  write_bohm_csv(bohm, s.grid(), a.fields());
  const auto text = bohm.str();
  CHECK(text.rfind("q0,q1,D,w0,w1,u0,u1,Vqu\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 1024);

  Potential free;
  MpqhdAnalysis m(calc, free, s.hbar(), s[1]);
  std::ostringstream hydro;
  write_hydro_csv(hydro, s.grid(), m.sort_fields(1));
  CHECK(hydro.str().rfind("q0,rho,j0,v0,P,Pi00,f0,fqu0,p00\n", 0) == 0);

  TrajectoryBundle b;
  b.axis_count = 1;
  b.times = {0.0, 0.5};
  b.positions = {{0.25, 0.5}};
  b.flags = {TrajectoryFlag::ok};
  b.flagged_at = {2};
  std::ostringstream traj;
  write_trajectories_csv(traj, b);
  CHECK(traj.str().rfind("t,id,q0,flag\n", 0) == 0);
  CHECK(traj.str().find("0.5,0,0.5,") != std::string::npos);
}

TEST_CASE("files on disk") {
  const auto s = small_series();
  const std::string path = "test_io_roundtrip.qhd";
  save_series(path, s);
  CHECK(load_series(path).size() == 3);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_series("does/not/exist.qhd"), Error);
}
