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

#include "core/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace rml::sim {

UasSim::UasSim(const UasSimConfig& config, const geo::GridSpec& grid)
    : config_(config), grid_(grid), rng_(config.seed) {
  if (config.vertiports_latlon.empty()) {
    fail(ErrorCode::InvalidArgument, "uas sim needs at least one vertiport");
  }
  if (config.speed_kmh <= 0 || config.report_rate_hz <= 0) {
    fail(ErrorCode::InvalidArgument, "uas speed and report rate must be > 0");
  }
  speed_ms_ = config.speed_kmh / 3.6;
  report_interval_ = 1.0 / config.report_rate_hz;
  auto projection = grid.projection();
  for (auto [lat, lon] : config.vertiports_latlon) {
    vertiports_.push_back(projection.forward(lat, lon));
  }
  for (int i = 0; i < config.fleet; ++i) {
    Uas uas;
    uas.id = "uas-" + std::to_string(i);
    uas.pos = random_vertiport();
    uas.target = random_destination();
    uas.to_vertiport = false;
    uas.next_report = report_interval_;
    fleet_.push_back(std::move(uas));
  }
}

geo::Vec2 UasSim::random_destination() {
  std::uniform_real_distribution<double> x(-grid_.width_m / 2,
                                           grid_.width_m / 2);
  std::uniform_real_distribution<double> y(-grid_.height_m / 2,
                                           grid_.height_m / 2);
  double dx = x(rng_);
  double dy = y(rng_);
  return {dx, dy};
}

geo::Vec2 UasSim::random_vertiport() {
  std::uniform_int_distribution<size_t> pick(0, vertiports_.size() - 1);
  return vertiports_[pick(rng_)];
}

void UasSim::advance(Uas& uas, double dt) {
  double budget = speed_ms_ * dt;
  geo::Vec2 leg = uas.target - uas.pos;
  double remaining = geo::norm(leg);
  // Arrival within one report interval's travel triggers the next waypoint:
  // alternate random destination / random vertiport.
  if (remaining <= budget) {
    uas.pos = uas.target;
    uas.target = uas.to_vertiport ? random_vertiport() : random_destination();
    uas.to_vertiport = !uas.to_vertiport;
    return;
  }
  uas.pos = uas.pos + geo::Vec2{leg.x / remaining * budget,
                                leg.y / remaining * budget};
}

std::vector<TimedReport> UasSim::step(double now) {
  std::vector<TimedReport> out;
  for (;;) {
    // Emit strictly in time order across the fleet.
    Uas* due = nullptr;
    for (auto& uas : fleet_) {
      if (uas.next_report <= now &&
          (!due || uas.next_report < due->next_report)) {
        due = &uas;
      }
    }
    if (!due) break;
    advance(*due, report_interval_);
    std::normal_distribution<double> noise(0.0, config_.report_std_m);
    signals::EntityReport report;
    report.id = due->id;
    report.east = due->pos.x + (config_.report_std_m > 0 ? noise(rng_) : 0.0);
    report.north = due->pos.y + (config_.report_std_m > 0 ? noise(rng_) : 0.0);
    report.pos_std = config_.report_std_m;
    out.push_back(TimedReport{due->next_report, report});
    due->next_report += report_interval_;
  }
  return out;
}

double UasSim::next_report_time() const {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& uas : fleet_) t = std::min(t, uas.next_report);
  return t;
}

namespace {

// "YYYY-MM-DDTHH:MM:SS[.frac][Z]" or plain epoch seconds.
std::optional<double> parse_timestamp(const std::string& text) {
  std::tm tm{};
  double frac = 0.0;
  int y, mo, d, h, mi;
  double sec;
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%lf", &y, &mo, &d, &h, &mi,
                  &sec) == 6 ||
      std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%lf", &y, &mo, &d, &h, &mi,
                  &sec) == 6) {
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = 0;
    double whole = std::floor(sec);
    frac = sec - whole;
    time_t base = timegm(&tm);
    if (base == -1) return std::nullopt;
    return double(base) + whole + frac;
  }
  char* end = nullptr;
  double value = std::strtod(text.c_str(), &end);
  if (end && *end == '\0' && !text.empty()) return value;
  return std::nullopt;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

ReplayTracks parse_ais_csv(const std::string& text) {
  ReplayTracks tracks;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, double> last_t;
  bool first_line = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_csv_line(line);
    if (first_line) {
      first_line = false;
      // Optional header row.
      if (!cols.empty() && (cols[0] == "mmsi" || cols[0] == "MMSI")) continue;
    }
    if (cols.size() < 4) {
      ++tracks.malformed;
      continue;
    }
    auto t = parse_timestamp(cols[1]);
    char* end = nullptr;
    double lat = std::strtod(cols[2].c_str(), &end);
    bool lat_ok = end && *end == '\0' && !cols[2].empty();
    double lon = std::strtod(cols[3].c_str(), &end);
    bool lon_ok = end && *end == '\0' && !cols[3].empty();
    if (cols[0].empty() || !t || !lat_ok || !lon_ok || std::abs(lat) > 90.0 ||
        std::abs(lon) > 180.0) {
      ++tracks.malformed;
      continue;
    }
    // Timestamps must be strictly increasing per entity.
    auto it = last_t.find(cols[0]);
    if (it != last_t.end() && *t <= it->second) {
      ++tracks.malformed;
      continue;
    }
    last_t[cols[0]] = *t;
    tracks.records.push_back(ReplayRecord{cols[0], *t, lat, lon});
  }
  std::stable_sort(
      tracks.records.begin(), tracks.records.end(),
      [](const ReplayRecord& a, const ReplayRecord& b) { return a.t < b.t; });
  return tracks;
}

ReplayTracks load_ais_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ais_csv(buf.str());
}

Replayer::Replayer(ReplayTracks tracks, double time_scale,
                   const geo::LocalProjection& projection, double report_std_m)
    : tracks_(std::move(tracks)),
      time_scale_(time_scale > 0 ? time_scale : 1.0),
      projection_(projection),
      report_std_m_(report_std_m) {
  if (!tracks_.records.empty()) t0_ = tracks_.records.front().t;
}

double Replayer::next_time() const {
  if (pos_ >= tracks_.records.size())
    return std::numeric_limits<double>::infinity();
  return (tracks_.records[pos_].t - t0_) / time_scale_;
}

std::optional<TimedReport> Replayer::next() {
  if (pos_ >= tracks_.records.size()) return std::nullopt;
  const ReplayRecord& rec = tracks_.records[pos_++];
  geo::Vec2 p = projection_.forward(rec.lat, rec.lon);
  TimedReport out;
  out.t = (rec.t - t0_) / time_scale_;
  out.report.id = rec.id;
  out.report.east = p.x;
  out.report.north = p.y;
  out.report.pos_std = report_std_m_;
  return out;
}

}  // namespace rml::sim
