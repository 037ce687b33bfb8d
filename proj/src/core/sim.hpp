/*
 * Copyright 2026 The RML Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Traffic generators: a simulated UAS fleet commuting between vertiports
// and random destinations, and a replayer for recorded vessel tracks.

#ifndef RML_CORE_SIM_HPP
#define RML_CORE_SIM_HPP

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core/geo.hpp"
#include "core/signals.hpp"

namespace rml::sim {

struct UasSimConfig {
  std::vector<std::pair<double, double>> vertiports_latlon;  // lat, lon
  double speed_kmh = 100.0;
  double report_rate_hz = 2.0;
  int fleet = 12;
  uint64_t seed = 1;
  double report_std_m = 15.0;
};

struct TimedReport {
  double t = 0.0;
  signals::EntityReport report;
};

/// Straight-segment kinematics: spawn at a random vertiport, fly to a random
/// destination inside the mission extent, then to a random vertiport, and so
/// on. Reports at a fixed rate with Gaussian position noise. Deterministic
/// under a fixed seed.
class UasSim {
 public:
  UasSim(const UasSimConfig& config, const geo::GridSpec& grid);

  /// All reports due up to and including `now`, in time order.
  std::vector<TimedReport> step(double now);

  double next_report_time() const;

 private:
  struct Uas {
    std::string id;
    geo::Vec2 pos;
    geo::Vec2 target;
    bool to_vertiport = false;
    double next_report = 0.0;
  };

  geo::Vec2 random_destination();
  geo::Vec2 random_vertiport();
  void advance(Uas& uas, double dt);

  UasSimConfig config_;
  geo::GridSpec grid_;
  std::vector<geo::Vec2> vertiports_;
  std::vector<Uas> fleet_;
  std::mt19937_64 rng_;
  double speed_ms_;
  double report_interval_;
};

struct ReplayRecord {
  std::string id;
  double t = 0.0;  // seconds since epoch of the recording
  double lat = 0.0;
  double lon = 0.0;
};

struct ReplayTracks {
  std::vector<ReplayRecord> records;  // time-ordered
  size_t malformed = 0;               // rows skipped while loading
};

/// CSV schema: mmsi,timestamp_iso8601,lat,lon — extra columns ignored,
/// malformed and per-entity out-of-order rows skipped and counted.
ReplayTracks load_ais_csv(const std::string& path);
ReplayTracks parse_ais_csv(const std::string& text);

/// Replays records on a virtual timeline starting at 0, with original gaps
/// divided by `time_scale`.
class Replayer {
 public:
  Replayer(ReplayTracks tracks, double time_scale,
           const geo::LocalProjection& projection,
           double report_std_m = 0.0);

  std::optional<TimedReport> next();
  double next_time() const;

 private:
  ReplayTracks tracks_;
  double time_scale_;
  geo::LocalProjection projection_;
  double report_std_m_;
  double t0_ = 0.0;
  size_t pos_ = 0;
};

}  // namespace rml::sim

#endif  // RML_CORE_SIM_HPP
