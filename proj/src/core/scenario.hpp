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

// Scenario configuration: one JSON file binding the rule program, grid,
// feature data, error models, traffic generators, and engine parameters.

#ifndef RML_CORE_SCENARIO_HPP
#define RML_CORE_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>

#include "core/circuit.hpp"
#include "core/geo.hpp"
#include "core/signals.hpp"
#include "core/sim.hpp"

namespace rml::run {

struct ErrorModel {
  std::map<std::string, double> sigma_by_class;
  double default_sigma_m = 10.0;

  double sigma_for(const std::string& cls) const {
    auto it = sigma_by_class.find(cls);
    return it == sigma_by_class.end() ? default_sigma_m : it->second;
  }
};

struct ReplayConfig {
  std::string channel;
  std::string csv_path;  // resolved against the scenario directory
  double time_scale = 1.0;
  double silence_timeout_s = 120.0;
  double report_std_m = 0.0;
};

struct UasChannelConfig {
  std::string channel;
  sim::UasSimConfig sim;
  double silence_timeout_s = 120.0;
};

struct Scenario {
  std::string path;      // scenario file itself
  std::string base_dir;  // directory scenario-relative paths resolve against
  std::string program_path;
  geo::GridSpec grid;
  std::string features_path;
  ErrorModel error_model;
  int static_samples = 200;
  uint64_t seed = 42;
  signals::PhiConfig phi;  // entity displacement defaults to half a cell
  signals::FocConfig foc;
  circuit::ClusterConfig cluster;
  std::optional<UasChannelConfig> uas;
  std::optional<ReplayConfig> replay;
  double support_radius_m = 0.0;  // 0: three times the largest threshold
  double duration_s = 60.0;
  double snapshot_period_s = 5.0;
  bool write_pgm = false;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir,
                        const std::string& path);

}  // namespace rml::run

#endif  // RML_CORE_SCENARIO_HPP
