#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("qhydro_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result qhydro(const std::string& args) {
  const auto out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string(QHYDRO_EXE) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string cfg(const std::string& name) { return std::string(QHD_SCENARIO_DIR) + "/" + name; }

}  // namespace

TEST_CASE("stationary scenario passes every check") {
  const auto dir = scratch() / "stationary";
  const auto r = qhydro("run --scenario " + cfg("stationary.cfg") + " --out " + dir.string());
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["all_passed"] == true);
  for (const auto& e : report["entries"]) {
    const std::string eq = e["equation"];
    if (eq == "nonsuperposition_cauchy") continue;
    CAPTURE(eq);
    CHECK(e["norm"].get<double>() < 1e-5);
  }
  for (const char* f : {"manifest.json", "scenario.json", "snapshots.qhd", "bohm_fields.csv", "hydro_A.csv",
                        "hydro.qhd", "report.txt"})
    CHECK(fs::exists(dir / f));
}

TEST_CASE("schema errors name the field and fail the run") {
  const auto r = qhydro("run --scenario " + cfg("bad.cfg") + " --out " + (scratch() / "bad").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("sorts[0].mass") != std::string::npos);
}

TEST_CASE("reports are byte-identical across runs and seeds are recorded") {
  const auto a = scratch() / "rep_a", b = scratch() / "rep_b";
  const std::string common = " --scenario coherent --stages verify --seed 7";
  REQUIRE(qhydro("run" + common + " --out " + a.string()).code == 0);
  REQUIRE(qhydro("run" + common + " --out " + b.string()).code == 0);
  const auto ra = slurp(a / "report.json");
  CHECK(ra == slurp(b / "report.json"));
  const auto j = nlohmann::json::parse(ra);
  CHECK(j["seed"] == 7);
  std::set<std::string> eqs;
  for (const auto& e : j["entries"]) eqs.insert(e["equation"].get<std::string>());
  for (const char* want : {"qpot_forms", "bm_continuity", "eulerian_motion", "force_identity", "mpqhd_continuity",
                           "ehrenfest", "cauchy", "cauchy_equivalence", "mass_sum_rule", "boost_invariance"})
    CHECK(eqs.count(want) == 1);
}

TEST_CASE("imported snapshots reproduce the report") {
  const auto a = scratch() / "imp_a", b = scratch() / "imp_b";
  REQUIRE(qhydro("run --scenario two_sort_product --stages propagate,verify --out " + a.string()).code == 0);
  REQUIRE(qhydro("run --scenario two_sort_product --stages verify --snapshots " + (a / "snapshots.qhd").string() +
                 " --out " + b.string())
              .code == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  const auto inspect = qhydro("inspect " + (a / "snapshots.qhd").string());
  CHECK(inspect.code == 0);
  CHECK(inspect.out.find("frames      3") != std::string::npos);

  // a grid mismatch is refused
  const auto bad = qhydro("run --scenario two_sort_product --grid-override n=64 --stages verify --snapshots " +
                          (a / "snapshots.qhd").string() + " --out " + (scratch() / "imp_c").string());
  CHECK(bad.code == 1);
}

TEST_CASE("tolerance failures exit with 2") {
  const auto tol = scratch() / "tight.json";
  std::ofstream(tol) << R"({"bm_continuity": 1e-30})";
  const auto r = qhydro("run --scenario coherent --stages verify --tolerances " + tol.string() + " --out " +
                        (scratch() / "tight").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("FAIL") != std::string::npos);

  std::ofstream(scratch() / "typo.json") << R"({"bm_continuty": 1})";
  const auto t = qhydro("run --scenario coherent --stages verify --tolerances " + (scratch() / "typo.json").string() +
                        " --out " + (scratch() / "typo").string());
  CHECK(t.code == 1);
  CHECK(t.err.find("bm_continuty") != std::string::npos);
}

TEST_CASE("listing and showing scenarios") {
  const auto list = qhydro("list-scenarios");
  CHECK(list.code == 0);
  CHECK(std::count(list.out.begin(), list.out.end(), '\n') >= 6);
  for (const char* name : {"stationary", "free_gaussian", "coherent", "two_sort_product", "symmetrized_pair",
                           "opposite_boost_pair"})
    CHECK(list.out.find(name) != std::string::npos);
  const auto show = qhydro("show-scenario " + cfg("free_gaussian.cfg"));
  CHECK(show.code == 0);
  CHECK(nlohmann::json::parse(show.out)["name"] == "free_gaussian");
  CHECK(qhydro("run --scenario nowhere --out " + (scratch() / "x").string()).code == 1);
  CHECK(qhydro("run --scenario coherent --stages bogus --out " + (scratch() / "y").string()).code == 1);
  CHECK(qhydro("frobnicate").code != 0);
}
