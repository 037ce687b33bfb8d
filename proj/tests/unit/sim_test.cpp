#include <doctest.h>

#include <cmath>
#include <map>

#include "core/geo.hpp"
#include "core/sim.hpp"

using namespace rml;
using namespace rml::sim;

namespace {

geo::GridSpec mission_grid() {
  geo::GridSpec grid;
  grid.origin_lat = 40.73;
  grid.origin_lon = -73.99;
  grid.width_m = 8000.0;
  grid.height_m = 8000.0;
  grid.cols = 80;
  grid.rows = 80;
  return grid;
}

UasSimConfig base_config() {
  UasSimConfig config;
  config.vertiports_latlon = {{40.74, -73.99}, {40.72, -74.00}, {40.73, -73.97}};
  config.fleet = 3;
  config.seed = 7;
  config.report_std_m = 0.0;
  return config;
}

}  // namespace

TEST_CASE("uas kinematics: 100 km/h covers 1 km in 36 s") {
  geo::GridSpec grid = mission_grid();
  UasSimConfig config = base_config();
  config.fleet = 1;
  UasSim sim(config, grid);
  auto reports = sim.step(36.0);
  REQUIRE(reports.size() == 72);  // 2 Hz for 36 s
  // Distance along the (straight) path equals speed * time if no waypoint
  // was reached; sum consecutive displacements to be robust to turns.
  double travelled = 0.0;
  geo::Vec2 prev{reports[0].report.east, reports[0].report.north};
  for (size_t i = 1; i < reports.size(); ++i) {
    geo::Vec2 cur{reports[i].report.east, reports[i].report.north};
    travelled += geo::dist(prev, cur);
    prev = cur;
  }
  // 71 intervals of 0.5 s at 27.78 m/s, measured from the first report.
  CHECK(travelled ==
        doctest::Approx(71 * 0.5 * (100.0 / 3.6)).epsilon(0.001));
}

TEST_CASE("uas fleet size zero emits nothing") {
  UasSimConfig config = base_config();
  config.fleet = 0;
  UasSim sim(config, mission_grid());
  CHECK(sim.step(10.0).empty());
}

TEST_CASE("uas streams are deterministic under a fixed seed") {
  geo::GridSpec grid = mission_grid();
  UasSimConfig config = base_config();
  config.report_std_m = 15.0;
  UasSim a(config, grid);
  UasSim b(config, grid);
  auto ra = a.step(30.0);
  auto rb = b.step(30.0);
  REQUIRE(ra.size() == rb.size());
  for (size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].t == rb[i].t);
    CHECK(ra[i].report == rb[i].report);
  }
}

TEST_CASE("uas positions stay inside the extent plus one report of travel") {
  geo::GridSpec grid = mission_grid();
  UasSimConfig config = base_config();
  config.fleet = 8;
  config.report_std_m = 0.0;
  UasSim sim(config, grid);
  double slack = (100.0 / 3.6) * 0.5;
  for (auto& r : sim.step(600.0)) {
    CHECK(std::abs(r.report.east) <= grid.width_m / 2 + slack);
    CHECK(std::abs(r.report.north) <= grid.height_m / 2 + slack);
  }
}

TEST_CASE("uas report rate within 5 percent over a minute") {
  geo::GridSpec grid = mission_grid();
  UasSimConfig config = base_config();
  config.fleet = 4;
  UasSim sim(config, grid);
  auto reports = sim.step(60.0);
  std::map<std::string, int> counts;
  for (auto& r : reports) counts[r.report.id]++;
  REQUIRE(counts.size() == 4);
  for (auto& [id, n] : counts) {
    CHECK(std::abs(n - 120) <= 6);
  }
}

TEST_CASE("ais csv parsing: header, extra columns, malformed rows") {
  std::string csv =
      "mmsi,timestamp_iso8601,lat,lon,name\n"
      "111,2024-03-01T10:00:00,40.70,-74.02,alpha\n"
      "222,2024-03-01T10:00:05,40.71,-74.01,beta\n"
      "111,2024-03-01T10:00:10,40.701,-74.018,alpha\n"
      "garbage line\n"
      "111,2024-03-01T10:00:02,40.70,-74.02,out-of-order\n"
      "333,not-a-time,40.7,-74.0\n";
  ReplayTracks tracks = parse_ais_csv(csv);
  CHECK(tracks.records.size() == 3);
  CHECK(tracks.malformed == 3);
  CHECK(tracks.records[0].id == "111");
  CHECK(tracks.records[1].id == "222");
}

TEST_CASE("replay preserves per-entity order and scales gaps") {
  std::string csv =
      "111,2024-03-01T10:00:00,40.70,-74.02\n"
      "222,2024-03-01T10:00:02,40.71,-74.01\n"
      "111,2024-03-01T10:00:10,40.701,-74.018\n";
  geo::LocalProjection projection(40.7, -74.0);

  Replayer one(parse_ais_csv(csv), 1.0, projection);
  std::vector<TimedReport> emitted;
  while (auto r = one.next()) emitted.push_back(*r);
  REQUIRE(emitted.size() == 3);
  CHECK(emitted[0].t == 0.0);
  CHECK(emitted[1].t == doctest::Approx(2.0));
  CHECK(emitted[2].t == doctest::Approx(10.0));

  Replayer ten(parse_ais_csv(csv), 10.0, projection);
  std::vector<TimedReport> fast;
  while (auto r = ten.next()) fast.push_back(*r);
  CHECK(fast[1].t == doctest::Approx(0.2));
  CHECK(fast[2].t == doctest::Approx(1.0));

  // Per-entity order is preserved.
  double last_111 = -1.0;
  for (auto& r : emitted) {
    if (r.report.id == "111") {
      CHECK(r.t > last_111);
      last_111 = r.t;
    }
  }
}
