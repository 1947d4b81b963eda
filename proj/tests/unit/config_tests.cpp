#include "doctest.h"

#include "shel/csv.hpp"
#include "shel/errors.hpp"
#include "shel/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

using namespace shel;

namespace {
const std::string kFullConfig = R"(# demo configuration
name = demo
kind = c3
grid = 64
dt = 0.002
t_end = 0.1
seed = 99
paths = 4
clamp = true
kappa = { kind = exponential, ell = 0.25, scale = 1.5 }
g = { kind = logistic, param = 1.2 }
h = { kind = linear, scale = 0.4 }
boundary = { kind = sinusoid, c0 = 0.1, amp0 = 0.2, omega0 = 3.0, phase0 = 0.3, c1 = 0.5 }
initial = { kind = sine, a = 0.7, mode = 2 }
)";
}  // namespace

TEST_CASE("a full configuration parses to the right solve settings") {
  const RunConfig rc = parse_run_config(kFullConfig);
  CHECK(rc.name == "demo");
  CHECK(rc.solve.kind == BoundaryKind::C3);
  CHECK(rc.solve.grid_n == 64);
  CHECK(rc.solve.time.dt == doctest::Approx(0.002).epsilon(1e-15));
  CHECK(rc.solve.time.n_steps == 50);
  CHECK(rc.solve.seed.master == 99);
  CHECK(rc.paths == 4);
  CHECK(rc.solve.clamp_negative);
  CHECK(rc.solve.kappa.name == "exponential");
  CHECK(rc.solve.kappa(0.2, 0.2) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(rc.solve.coeffs.G(0.5) == doctest::Approx(1.2 * 0.25).epsilon(1e-14));
  CHECK(rc.solve.coeffs.H(2.0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(rc.solve.boundary.kind == BoundaryGen::sinusoid);
  CHECK(rc.solve.boundary.amp0 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(rc.solve.initial.kind == "sine");
  CHECK(rc.solve.initial.mode == 2);
  CHECK(rc.config_hash == fnv1a64(rc.canonical));
  CHECK(rc.resolved.at("kind") == "C3");
  CHECK(rc.resolved.count("kappa.ell") == 1);
}

TEST_CASE("defaults fill every unstated setting") {
  const RunConfig rc = parse_run_config("dt = 0.001\nsteps = 10\n");
  CHECK(rc.solve.kind == BoundaryKind::C1);
  CHECK(rc.solve.grid_n == 128);
  CHECK(rc.solve.time.n_steps == 10);
  CHECK(rc.paths == 1);
  CHECK_FALSE(rc.solve.clamp_negative);
  CHECK(rc.solve.kappa.name == "constant");
  CHECK(rc.solve.coeffs.g_is_zero);
  CHECK(rc.solve.coeffs.h_is_zero);
  CHECK(rc.solve.boundary.kind == BoundaryGen::constant);
  CHECK(rc.solve.initial.kind == "zero");
  // Every effective setting appears in the resolved map.
  for (const char* key : {"kind", "grid", "dt", "steps", "seed", "paths", "clamp",
                          "kappa.kind", "g.kind", "h.kind", "boundary.kind",
                          "initial.kind"})
    CHECK(rc.resolved.count(key) == 1);
}

TEST_CASE("configuration errors carry the config error type") {
  // Unknown key.
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nsteps = 2\nwhatever = 3\n"), ConfigError);
  // Duplicate key.
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\ndt = 0.002\nsteps = 2\n"), ConfigError);
  // steps and t_end together.
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nsteps = 2\nt_end = 0.01\n"), ConfigError);
  // t_end not a multiple of dt.
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nt_end = 0.0015\n"), ConfigError);
  // Missing time specification entirely.
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\n"), ConfigError);
  // Bad values.
  CHECK_THROWS_AS(parse_run_config("dt = -0.001\nsteps = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nsteps = 2\ngrid = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nsteps = 2\npaths = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nsteps = 2\nkind = c7\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nsteps = 2\ndt = oops\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config("dt = 0.001\nsteps = 2\nkappa = { kind = exponential, ell = 0 }\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_run_config("dt = 0.001\nsteps = 2\ninitial = { kind = custom }\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config("dt = 0.001\nsteps = 2\nboundary = { kind = fbm, hurst = 0.7 }\n"),
      ConfigError);
  // Malformed inline table.
  CHECK_THROWS_AS(parse_run_config("dt = 0.001\nsteps = 2\nkappa = { kind = constant\n"),
                  ConfigError);
}

TEST_CASE("comments and spacing do not change the canonical form") {
  const RunConfig a = parse_run_config("dt = 0.001\nsteps = 10\ngrid = 32\n");
  const RunConfig b =
      parse_run_config("# heat bath\n  grid =    32   # coarse\n\ndt = 0.001\nsteps = 10\n");
  CHECK(a.canonical == b.canonical);
  CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("distinct settings hash differently") {
  const RunConfig a = parse_run_config("dt = 0.001\nsteps = 10\n");
  const RunConfig b = parse_run_config("dt = 0.001\nsteps = 10\nseed = 1\n");
  CHECK(a.config_hash != b.config_hash);
}

TEST_CASE("programmatic overrides refresh the canonical text") {
  RunConfig rc = parse_run_config("dt = 0.001\nsteps = 10\nseed = 5\npaths = 2\n");
  const std::uint64_t before = rc.config_hash;
  rc.solve.seed.master = 6;
  rc.paths = 3;
  refresh_canonical(rc);
  CHECK(rc.config_hash != before);
  CHECK(rc.resolved.at("seed") == "6");
  CHECK(rc.resolved.at("paths") == "3");
  CHECK(rc.canonical.find("seed = 6") != std::string::npos);
}

TEST_CASE("fnv1a64 matches its reference constants") {
  // Standard FNV-1a 64-bit: offset basis for "", known digest for "a".
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("missing config files raise config errors") {
  CHECK_THROWS_AS(load_run_config("/nonexistent/path/to.conf"), ConfigError);
}

TEST_CASE("doubles survive the shortest round-trip format") {
  // 5e-308 sits just above the smallest normal double; subnormals are avoided
  // because libstdc++'s std::stod reports them as out_of_range.
  for (double v : {0.1, 1.0 / 3.0, 2e300, -0.0, 5e-308, 6.02214076e23, -123.456}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}


namespace {
CsvTable read_csv_text(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}
}  // namespace

TEST_CASE("trajectory tables round-trip through csv") {
  Trajectory traj;
  traj.time = TimeGrid{0.0, 0.25, 2};
  traj.states = {{0.1, 0.2, 0.3}, {0.4, 1.0 / 3.0, 0.6}, {0.7, 0.8, 1e-17}};
  const std::string text = trajectory_csv(traj);
  // Header names time then one column per node.
  CHECK(text.rfind("t,x_0,x_1,x_2\n", 0) == 0);
  const CsvTable table = read_csv_text(text);
  REQUIRE(table.header.size() == 4);
  REQUIRE(table.rows.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(table.rows[k][0] == 0.25 * static_cast<double>(k));
    for (std::size_t j = 0; j < 3; ++j) CHECK(table.rows[k][j + 1] == traj.states[k][j]);
  }
}

TEST_CASE("csv reading rejects ragged and non-numeric rows") {
  CHECK_THROWS_AS(read_csv_text("a,b\n1,2\n3\n"), Error);
  CHECK_THROWS_AS(read_csv_text("a,b\n1,fish\n"), Error);
  const CsvTable crlf = read_csv_text("a,b\r\n1,2\r\n");
  REQUIRE(crlf.rows.size() == 1);
  CHECK(crlf.rows[0][1] == 2.0);
}
