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

// End-to-end pipeline: compile the program, precompute static relation
// fields, stream simulated and replayed traffic, and maintain the mission
// landscape reactively, logging rates, gains, and timings.

#ifndef RML_CORE_RUNNER_HPP
#define RML_CORE_RUNNER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/scenario.hpp"

namespace rml::run {

struct RunOptions {
  bool reactive = true;       // false: full re-evaluation per update
  bool virtual_clock = true;  // false: pace events against the wall clock
  std::optional<uint64_t> seed;
  std::optional<double> partition_width_hz;
  std::optional<double> dwell_s;
  std::optional<double> duration_s;
  std::optional<bool> write_pgm;
  std::string out_dir = "out";
  std::string updates_path;         // replay a recorded update stream
  std::string dump_partition_path;  // write the final partition here
};

struct RunStats {
  double duration_s = 0.0;
  size_t updates_seen = 0;       // messages ingested
  size_t updates_meaningful = 0;
  size_t updates_applied = 0;    // reached the circuit and recomputed
  size_t updates_skipped = 0;    // rejected by the weight-level gate
  int64_t circuit_ops = 0;
  size_t snapshots = 0;
  size_t repartitions = 0;
  double last_rho = 0.0;  // 0 when gain was never defined
  std::map<std::string, double> rates_hz;
  std::map<std::string, int> clusters;
  double wall_seconds = 0.0;

  std::string to_json() const;
};

RunStats run_scenario(const Scenario& scenario, const RunOptions& options);

struct BenchStats {
  size_t updates_applied = 0;
  bool speedup_defined = false;
  double reactive_mean_us = 0.0, reactive_std_us = 0.0;
  double full_mean_us = 0.0, full_std_us = 0.0;
  int64_t reactive_ops = 0, full_ops = 0;
  double speedup_wall = 0.0, speedup_ops = 0.0;
  double rho = 0.0;
  double max_snapshot_diff = 0.0;  // reactive vs full, over all snapshots
  double wall_seconds = 0.0;

  std::string to_json() const;
};

/// Runs reactive and full modes over identical recorded update streams and
/// compares cost and outputs.
BenchStats bench_scenario(const Scenario& scenario, const RunOptions& options,
                          std::optional<double> duration_s = std::nullopt);

struct FieldsStats {
  std::map<std::string, std::string> written;  // channel -> file base
  std::string to_json() const;
};

/// Precomputes the static relation fields and writes them as CSV (and PGM
/// for probability fields when enabled).
FieldsStats compute_fields(const Scenario& scenario, const RunOptions& options);

struct SimulateStats {
  size_t records = 0;
  size_t malformed_csv_rows = 0;
  std::string out_path;
  std::string to_json() const;
};

/// Runs only the traffic generators and writes the update stream as
/// newline-delimited records for deterministic replay.
SimulateStats simulate_stream(const Scenario& scenario,
                              const RunOptions& options);

}  // namespace rml::run

#endif  // RML_CORE_RUNNER_HPP
