#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "core/grid_io.hpp"
#include "core/runner.hpp"
#include "core/scenario.hpp"

using namespace rml;
using namespace rml::run;
namespace fs = std::filesystem;

namespace {

std::string data_path(const std::string& name) {
  return std::string(RML_TEST_DATA_DIR) + "/" + name;
}

std::string temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rml_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("scenario loads with resolved paths and defaults") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  CHECK(s.grid.cols == 30);
  CHECK(s.program_path == data_path("listing1.resin"));
  CHECK(s.features_path == data_path("city_features.geojson"));
  CHECK(s.phi.epsilon == 0.003);
  // entity gate defaults to half a cell
  CHECK(s.phi.entity_min_displacement_m ==
        doctest::Approx(0.5 * s.grid.res_x()));
  CHECK(s.error_model.sigma_for("park") == 12.0);
  CHECK(s.error_model.sigma_for("unknown") == 10.0);
  REQUIRE(s.uas.has_value());
  CHECK(s.uas->sim.fleet == 4);
  REQUIRE(s.replay.has_value());
  CHECK(s.replay->time_scale == 5.0);
}

TEST_CASE("small scenario runs end to end and writes artifacts") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  RunOptions options;
  options.out_dir = temp_dir("run_small");
  options.dump_partition_path = options.out_dir + "/partition.txt";
  RunStats stats = run_scenario(s, options);

  CHECK(stats.updates_seen > 0);
  CHECK(stats.updates_applied > 0);
  CHECK(stats.snapshots == 5);  // t = 0, 5, 10, 15, 20
  CHECK(fs::exists(options.out_dir + "/snapshots/landscape_0000.csv"));
  CHECK(fs::exists(options.out_dir + "/snapshots/landscape_0004.pgm"));
  CHECK(fs::exists(options.out_dir + "/updates.csv"));
  CHECK(fs::exists(options.out_dir + "/rates.csv"));
  CHECK(fs::exists(options.out_dir + "/gain.csv"));
  CHECK(fs::exists(options.out_dir + "/summary.json"));
  CHECK(fs::exists(options.out_dir + "/partition.txt"));

  // Snapshots parse back losslessly and stay within [0, 1].
  auto snap = grid_io::read_csv(options.out_dir +
                                "/snapshots/landscape_0003.csv");
  CHECK(snap.grid.cols == 30);
  for (double v : snap.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  std::string rewritten = grid_io::to_csv(snap.grid, snap.values, snap.name,
                                          snap.timestamp);
  CHECK(rewritten ==
        slurp(options.out_dir + "/snapshots/landscape_0003.csv"));
}

TEST_CASE("reactive and full runs produce identical snapshots") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  RunOptions reactive;
  reactive.out_dir = temp_dir("run_reactive");
  RunStats r1 = run_scenario(s, reactive);

  RunOptions full;
  full.out_dir = temp_dir("run_full");
  full.reactive = false;
  RunStats r2 = run_scenario(s, full);

  CHECK(r1.updates_applied == r2.updates_applied);
  CHECK(r1.circuit_ops < r2.circuit_ops);  // strictly cheaper reactively
  for (size_t i = 0; i < r1.snapshots; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/snapshots/landscape_%04zu.csv", i);
    auto a = grid_io::read_csv(reactive.out_dir + name);
    auto b = grid_io::read_csv(full.out_dir + name);
    REQUIRE(a.values.size() == b.values.size());
    for (size_t k = 0; k < a.values.size(); ++k) {
      CHECK(std::abs(a.values[k] - b.values[k]) <= 1e-9);
    }
  }
}

TEST_CASE("equal seeds give byte-identical snapshots") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  RunOptions a;
  a.out_dir = temp_dir("run_det_a");
  run_scenario(s, a);
  RunOptions b;
  b.out_dir = temp_dir("run_det_b");
  run_scenario(s, b);
  for (int i = 0; i < 5; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/snapshots/landscape_%04d.csv", i);
    CHECK(slurp(a.out_dir + name) == slurp(b.out_dir + name));
  }
}

TEST_CASE("simulate writes a stream that replays identically") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  RunOptions sim_options;
  sim_options.out_dir = temp_dir("run_sim");
  SimulateStats sim_stats = simulate_stream(s, sim_options);
  CHECK(sim_stats.records > 0);
  CHECK(fs::exists(sim_stats.out_path));

  // Live generators vs recorded stream: identical snapshot bytes.
  RunOptions live;
  live.out_dir = temp_dir("run_live");
  run_scenario(s, live);
  RunOptions replayed;
  replayed.out_dir = temp_dir("run_replayed");
  replayed.updates_path = sim_stats.out_path;
  run_scenario(s, replayed);
  for (int i = 0; i < 5; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/snapshots/landscape_%04d.csv", i);
    CHECK(slurp(live.out_dir + name) == slurp(replayed.out_dir + name));
  }
}

TEST_CASE("fields subcommand writes static relation fields") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  RunOptions options;
  options.out_dir = temp_dir("run_fields");
  FieldsStats stats = compute_fields(s, options);
  CHECK(stats.written.size() == 4);  // park, water, primary, hospital
  CHECK(fs::exists(options.out_dir + "/over_park.csv"));
  CHECK(fs::exists(options.out_dir + "/distance_primary_mu.csv"));
  CHECK(fs::exists(options.out_dir + "/distance_primary_sigma.csv"));
  auto park = grid_io::read_csv(options.out_dir + "/over_park.csv");
  bool any_positive = false;
  for (double v : park.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    any_positive = any_positive || v > 0.0;
  }
  CHECK(any_positive);
}

TEST_CASE("bench on the small scenario: cheaper reactive, equal outputs") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  RunOptions options;
  options.out_dir = temp_dir("run_bench_small");
  BenchStats bench = bench_scenario(s, options, 15.0);
  REQUIRE(bench.speedup_defined);
  CHECK(bench.max_snapshot_diff <= 1e-9);
  CHECK(bench.full_ops > bench.reactive_ops);
  CHECK(bench.speedup_ops > 1.0);
  CHECK(fs::exists(options.out_dir + "/bench.json"));
}

TEST_CASE("single channel with whole-circuit cone: speedup near one") {
  // One source, one formula node, and a support radius covering the whole
  // grid: nothing can be memoized, every update touches every cell, and
  // the measured speedup collapses to the structural ratio of 1.
  Scenario s = load_scenario(data_path("single_channel.json"));
  RunOptions options;
  options.out_dir = temp_dir("bench_single");
  BenchStats bench = bench_scenario(s, options);
  REQUIRE(bench.speedup_defined);
  CHECK(bench.rho == 1.0);
  CHECK(bench.speedup_ops == doctest::Approx(1.0).epsilon(0.2));
  CHECK(bench.max_snapshot_diff <= 1e-12);
}

TEST_CASE("zero dynamic channels: one landscape computation, then idle") {
  Scenario s = load_scenario(data_path("static_only.json"));
  RunOptions options;
  options.out_dir = temp_dir("run_static");
  RunStats stats = run_scenario(s, options);
  CHECK(stats.updates_seen == 0);
  CHECK(stats.updates_applied == 0);
  CHECK(stats.snapshots == 3);  // t = 0, 5, 10 — all from the one evaluation
  auto first = slurp(options.out_dir + "/snapshots/landscape_0000.csv");
  auto last = slurp(options.out_dir + "/snapshots/landscape_0002.csv");
  // Identical grids; only the header timestamp differs.
  CHECK(first.substr(first.find('\n')) == last.substr(last.find('\n')));

  // Bench on an all-static scenario: no updates, speedup undefined.
  RunOptions bench_options;
  bench_options.out_dir = temp_dir("bench_static");
  BenchStats bench = bench_scenario(s, bench_options);
  CHECK(bench.updates_applied == 0);
  CHECK(!bench.speedup_defined);
}

TEST_CASE("scenario driving an undeclared channel fails at priming") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  s.uas->channel = "/distance/ghost";
  RunOptions options;
  options.out_dir = temp_dir("run_ghost");
  try {
    run_scenario(s, options);
    FAIL("expected UnknownChannel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownChannel);
  }
}

TEST_CASE("scenario with missing program file fails cleanly") {
  Scenario s = load_scenario(data_path("desk_small.json"));
  s.program_path = data_path("missing.resin");
  RunOptions options;
  options.out_dir = temp_dir("run_missing");
  CHECK_THROWS_AS(run_scenario(s, options), Error);
}
