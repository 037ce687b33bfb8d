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

#include "core/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace rml::run {

namespace {

using nlohmann::json;

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  return base_dir.empty() ? path : base_dir + "/" + path;
}

geo::GridSpec parse_grid(const json& j) {
  geo::GridSpec grid;
  grid.origin_lat = j.at("origin_lat").get<double>();
  grid.origin_lon = j.at("origin_lon").get<double>();
  grid.width_m = j.at("width_m").get<double>();
  grid.height_m = j.at("height_m").get<double>();
  grid.cols = j.at("cols").get<int>();
  grid.rows = j.at("rows").get<int>();
  if (grid.cols <= 0 || grid.rows <= 0 || grid.width_m <= 0 ||
      grid.height_m <= 0) {
    fail(ErrorCode::InvalidArgument, "grid extent and cells must be positive");
  }
  return grid;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir,
                        const std::string& path) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, path + ": " + e.what());
  }

  Scenario s;
  s.path = path;
  s.base_dir = base_dir;
  try {
    s.program_path = resolve(base_dir, j.at("program").get<std::string>());
    s.grid = parse_grid(j.at("grid"));
    s.features_path = resolve(base_dir, j.at("features").get<std::string>());

    if (j.contains("error_model")) {
      for (auto& [key, value] : j.at("error_model").items()) {
        if (key == "default") {
          s.error_model.default_sigma_m = value.get<double>();
        } else {
          s.error_model.sigma_by_class[key] = value.get<double>();
        }
      }
    }
    s.static_samples = j.value("static_samples", 200);
    s.seed = j.value("seed", uint64_t(42));
    s.phi.epsilon = j.value("phi_epsilon", 0.003);
    s.phi.entity_min_displacement_m =
        j.value("phi_entity_displacement_m",
                0.5 * std::min(s.grid.res_x(), s.grid.res_y()));
    if (j.contains("cluster")) {
      const json& c = j.at("cluster");
      s.cluster.partition_width_hz = c.value("partition_width_hz", 0.5);
      s.cluster.max_clusters = c.value("max_clusters", 8);
      s.cluster.dwell_s = c.value("dwell_s", 5.0);
    }
    s.foc.partition_width_hz = s.cluster.partition_width_hz;

    if (j.contains("uas")) {
      const json& u = j.at("uas");
      UasChannelConfig uas;
      uas.channel = u.at("channel").get<std::string>();
      for (const auto& vp : u.at("vertiports")) {
        uas.sim.vertiports_latlon.emplace_back(vp.at(0).get<double>(),
                                               vp.at(1).get<double>());
      }
      uas.sim.speed_kmh = u.value("speed_kmh", 100.0);
      uas.sim.report_rate_hz = u.value("report_rate_hz", 2.0);
      uas.sim.fleet = u.value("fleet", 12);
      uas.sim.report_std_m = u.value("report_std_m", 15.0);
      uas.sim.seed = s.seed ^ 0x9e3779b97f4a7c15ull;
      uas.silence_timeout_s = u.value("silence_timeout_s", 120.0);
      s.uas = std::move(uas);
    }
    if (j.contains("replay")) {
      const json& r = j.at("replay");
      ReplayConfig replay;
      replay.channel = r.at("channel").get<std::string>();
      replay.csv_path = resolve(base_dir, r.at("csv").get<std::string>());
      replay.time_scale = r.value("time_scale", 1.0);
      replay.silence_timeout_s = r.value("silence_timeout_s", 120.0);
      replay.report_std_m = r.value("report_std_m", 0.0);
      s.replay = std::move(replay);
    }
    s.support_radius_m = j.value("support_radius_m", 0.0);
    s.duration_s = j.value("duration_s", 60.0);
    s.snapshot_period_s = j.value("snapshot_period_s", 5.0);
    if (s.snapshot_period_s <= 0.0) {
      fail(ErrorCode::InvalidArgument, "snapshot_period_s must be positive");
    }
    s.write_pgm = j.value("write_pgm", false);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, path + ": " + e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string base_dir;
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) base_dir = path.substr(0, slash);
  return parse_scenario(buf.str(), base_dir, path);
}

}  // namespace rml::run
