#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "g6cstar/config.hpp"
#include "g6cstar/serialization.hpp"

using namespace g6cstar;
namespace fs = std::filesystem;

namespace {

// Runs the CLI binary, capturing stdout into a file; returns the exit code.
int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd =
      std::string(G6_CLI_PATH) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(R"(# comment
[run]
seed = 42
threads = 2

[testfn.t]
polarization = h3
frame = xbp
base_radii = 1 1 1
fiber_root_scale = 0.5

[grid.g]
axes = -1 1 8 ; 0 2 6
)");
  const ConfigFile cf = ConfigFile::parse(in);
  CHECK(cf.get_int_or("run", "seed", 0) == 42);
  CHECK(cf.get_int_or("run", "threads", 1) == 2);
  CHECK(cf.get_or("run", "missing", "x") == "x");
  CHECK_THROWS_AS(cf.get("run", "missing"), ConfigError);

  const auto tf = build_testfn(cf, "t");
  CHECK(tf->pol == Polarization::H3);
  CHECK(tf->frame == H3Frame::XBP);
  CHECK(tf->base[0].radius == 1.0);
  CHECK(tf->fiber_root_scale == 0.5);

  const Grid g = build_grid(cf, "g");
  REQUIRE(g.dim() == 2);
  CHECK(g.axes[0].n == 8);
  CHECK(g.axes[1].hi == 2.0);

  SECTION("bad entries are rejected") {
    std::istringstream bad1("[grid.g]\naxes = 0 1\n");
    const ConfigFile c1 = ConfigFile::parse(bad1);
    CHECK_THROWS_AS(build_grid(c1, "g"), ConfigError);
    std::istringstream bad2("key_without_section\n");
    CHECK_THROWS_AS(ConfigFile::parse(bad2), ConfigError);
    std::istringstream bad3("[grid.g]\naxes = 0 1 500 ; 0 1 500 ; 0 1 500\n");
    const ConfigFile c3 = ConfigFile::parse(bad3);
    CHECK_THROWS_AS(build_grid(c3, "g"), ConfigError);  // budget exceeded
  }
}

TEST_CASE("classify command round trip") {
  const fs::path tmp = fs::temp_directory_path() / "g6cstar_cli_test";
  fs::create_directories(tmp);
  const fs::path out = tmp / "classify.json";
  REQUIRE(run_cli("classify 0 0 0 1 0 1", out) == 0);
  const ojson j = ojson::parse(slurp(out));
  CHECK(j["stratum"] == 6);
  CHECK(j["invariants"]["phi"] == 2.0);
  const OrbitClass c = orbit_from_json(j["class"]);
  Functional f;
  f.q = 1;
  f.s = 1;
  const OrbitClass lib = classify(f);
  CHECK(c.kind == lib.kind);
  CHECK(c.eps == lib.eps);
  CHECK(c.nu == lib.nu);

  SECTION("parse failures exit nonzero") {
    CHECK(run_cli("classify 0 0 0 1 0", out) != 0);
    CHECK(run_cli("classify a b c d e f", out) != 0);
  }
}

TEST_CASE("atlas command emits the seven families") {
  const fs::path tmp = fs::temp_directory_path() / "g6cstar_cli_test";
  fs::create_directories(tmp);
  const fs::path out = tmp / "atlas.json";
  REQUIRE(run_cli("atlas", out) == 0);
  const ojson j = ojson::parse(slurp(out));
  CHECK(j.size() == 8);  // both open-orbit sign patterns listed
  CHECK(j[0]["stratum"] == 0);
  CHECK(j[0]["boundary"].empty());
}

TEST_CASE("config error exit codes") {
  const fs::path tmp = fs::temp_directory_path() / "g6cstar_cli_test";
  fs::create_directories(tmp);
  const fs::path out = tmp / "out.txt";

  SECTION("missing config file") {
    CHECK(run_cli("dstar --config /nonexistent.cfg", out) == 2);
  }
  SECTION("delta list too short") {
    const fs::path cfg = tmp / "short.cfg";
    std::ofstream(cfg) << R"([run]
seed = 1
[boundary]
deltas = 0.4
strata = nuQ
[testfn.l4]
polarization = l4
[testfn.la5]
polarization = la5
fiber_radii = 5 1 1 1 1
[grid.g2]
axes = -3 3 8 ; -1 6 8
[grid.g1]
axes = -1 0.9 8
[stratum.nuQ]
tf = l4
grid = g2
slice_tf = la5
slice_grid = g1
)";
    CHECK(run_cli("boundary-check --config " + cfg.string() + " --out " +
                      (tmp / "o1").string(),
                  out) == 2);
  }
  SECTION("budget-exceeding grid") {
    const fs::path cfg = tmp / "huge.cfg";
    std::ofstream(cfg) << R"([run]
seed = 1
[boundary]
deltas = 0.4 0.2
strata = nuQ
[testfn.l4]
polarization = l4
[testfn.la5]
polarization = la5
fiber_radii = 5 1 1 1 1
[grid.g2]
axes = -3 3 4000 ; -1 6 4000
[grid.g1]
axes = -1 0.9 8
[stratum.nuQ]
tf = l4
grid = g2
slice_tf = la5
slice_grid = g1
)";
    CHECK(run_cli("boundary-check --config " + cfg.string() + " --out " +
                      (tmp / "o2").string(),
                  out) == 2);
  }
}

TEST_CASE("operator export round trip") {
  const fs::path tmp = fs::temp_directory_path() / "g6cstar_export";
  fs::create_directories(tmp);
  auto tf = std::make_shared<PolarizedTestFn>(
      reference_testfn(Polarization::L4, H3Frame::E, 0, false));
  Grid g({{-1.0, 3.0, 6}, {-1.0, 3.0, 6}});
  const KernelOperator K = assemble_kernel(FourDPQRep{+1, +1}, tf, g);
  const std::string stem = (tmp / "kernel").string();
  export_operator(K, stem);

  // Binary payload: row-major little-endian complex64.
  std::ifstream bin(stem + ".c64", std::ios::binary);
  REQUIRE(bin.good());
  std::vector<float> data(2 * K.dim() * K.dim());
  bin.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(float)));
  REQUIRE(bin.gcount() ==
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const std::size_t i = rng.next() % K.dim(), j = rng.next() % K.dim();
    const cd v = K.map->entry(i, j);
    const std::size_t off = 2 * (i * K.dim() + j);
    CHECK(std::abs(static_cast<double>(data[off]) - v.real()) <= 1e-6);
    CHECK(std::abs(static_cast<double>(data[off + 1]) - v.imag()) <= 1e-6);
  }

  const ojson side = ojson::parse(slurp(stem + ".json"));
  CHECK(side["dtype"] == "complex64");
  CHECK(side["shape"][0] == K.dim());
  CHECK(side["rep"] == "fourDPQ");
  CHECK(slurp(stem + "_norms.csv").find("fourDPQ,") != std::string::npos);
}

TEST_CASE("boundary-check writes CSV and respects exit codes") {
  const fs::path tmp = fs::temp_directory_path() / "g6cstar_cli_bc";
  fs::create_directories(tmp);
  const fs::path cfg = tmp / "small.cfg";
  std::ofstream(cfg) << R"([run]
seed = 7
threads = 2
[boundary]
deltas = 0.4 0.2
strata = nuQ
with_refinement = false
op_tol = 1e-4
[testfn.l4]
polarization = l4
[testfn.la5]
polarization = la5
fiber_radii = 5 1 1 1 1
[grid.g2]
axes = -3 3 10 ; -1 6 14
[grid.g1]
axes = -1 0.91629 10
[stratum.nuQ]
tf = l4
grid = g2
slice_tf = la5
slice_grid = g1
)";
  const fs::path out = tmp / "stdout.txt";
  const int rc = run_cli("boundary-check --config " + cfg.string() + " --out " +
                             (tmp / "run").string(),
                         out);
  CHECK(rc == 0);
  const std::string csv = slurp(tmp / "run" / "boundary.csv");
  CHECK(csv.find("stratum,delta") == 0);
  CHECK(csv.find("nuQ,0.4") != std::string::npos);
}
