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

// Command-line front end. Talks to the engine exclusively through the
// shared-library C interface in rml.h.
//
// Exit codes: 0 success, 1 parse/validation failure, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "rml.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(rml_status status) {
  switch (status) {
    case RML_OK:
      return kExitOk;
    case RML_ERR_PARSE:
    case RML_ERR_VALIDATION:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

int report_failure(rml_status status) {
  std::fprintf(stderr, "error: %s\n", rml_last_error());
  return exit_code_for(status);
}

struct StringOut {
  char* text = nullptr;
  ~StringOut() { rml_string_free(text); }
};

struct Common {
  bool no_reactive = false;
  bool wall_clock = false;
  std::string out_dir = "out";
  uint64_t seed = 0;
  bool has_seed = false;
  double partition_width = 0.0;
  bool has_partition_width = false;
  double dwell = 0.0;
  bool has_dwell = false;
  double duration = 0.0;
  bool has_duration = false;
  bool pgm = false;

  rml_run_options options() const {
    rml_run_options o;
    rml_run_options_init(&o);
    o.reactive = no_reactive ? 0 : 1;
    o.virtual_clock = wall_clock ? 0 : 1;
    o.out_dir = out_dir.c_str();
    if (has_seed) {
      o.has_seed = 1;
      o.seed = seed;
    }
    if (has_partition_width) {
      o.has_partition_width = 1;
      o.partition_width_hz = partition_width;
    }
    if (has_dwell) {
      o.has_dwell = 1;
      o.dwell_s = dwell;
    }
    if (has_duration) {
      o.has_duration = 1;
      o.duration_s = duration;
    }
    if (pgm) {
      o.has_write_pgm = 1;
      o.write_pgm = 1;
    }
    return o;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_flag("--no-reactive", common.no_reactive,
                "full re-evaluation per update instead of reactive updates");
  cmd->add_flag_function(
      "--wall-clock", [&common](int64_t) { common.wall_clock = true; },
      "pace events against the wall clock");
  cmd->add_flag_function(
      "--virtual-clock", [&common](int64_t) { common.wall_clock = false; },
      "run events as fast as possible (default)");
  cmd->add_option("--out", common.out_dir, "artifact output directory");
  cmd->add_option("--seed", common.seed, "override the scenario seed")
      ->each([&common](const std::string&) { common.has_seed = true; });
  cmd->add_option("--partition-width", common.partition_width,
                  "frequency cluster width in Hz (default 0.5)")
      ->each([&common](const std::string&) {
        common.has_partition_width = true;
      });
  cmd->add_option("--dwell", common.dwell,
                  "seconds a cluster change must persist before restructuring")
      ->each([&common](const std::string&) { common.has_dwell = true; });
  cmd->add_option("--duration", common.duration,
                  "override the scenario duration in seconds")
      ->each([&common](const std::string&) { common.has_duration = true; });
  cmd->add_flag("--pgm", common.pgm, "also write PGM renderings");
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) return false;
  out << text;
  return out.good();
}

using ScenarioPtr = std::unique_ptr<rml_scenario, decltype(&rml_scenario_free)>;

int with_scenario(const std::string& path, Common& common,
                  rml_status (*fn)(const rml_scenario*,
                                   const rml_run_options*, char**),
                  const char* banner) {
  rml_scenario* raw = nullptr;
  rml_status status = rml_scenario_load(path.c_str(), &raw);
  if (status != RML_OK) return report_failure(status);
  ScenarioPtr scenario(raw, &rml_scenario_free);
  rml_run_options options = common.options();
  StringOut summary;
  status = fn(scenario.get(), &options, &summary.text);
  if (status != RML_OK) return report_failure(status);
  std::printf("%s\n%s\n", banner, summary.text ? summary.text : "{}");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reactive mission landscape engine"};
  app.require_subcommand(1);

  // check
  std::string check_file;
  CLI::App* check = app.add_subcommand(
      "check", "parse and validate a rule program");
  check->add_option("file", check_file, "program file (.resin)")->required();

  // compile
  std::string compile_file, dump_circuit_path, dump_partition_path, clusters;
  double compile_width = 0.0;
  size_t compile_cells = 1;
  CLI::App* compile = app.add_subcommand(
      "compile", "compile a rule program to its exact circuit");
  compile->add_option("file", compile_file, "program file (.resin)")
      ->required();
  compile->add_option("--dump-circuit", dump_circuit_path,
                      "write the node listing to this file");
  compile->add_option("--dump-partition", dump_partition_path,
                      "write the frequency partition to this file");
  compile->add_option("--clusters", clusters,
                      "cluster assignment, e.g. \"/distance/uas=2\"");
  compile->add_option("--partition-width", compile_width,
                      "cluster width in Hz for the partition dump");
  compile->add_option("--cells", compile_cells,
                      "grid cells assumed by the partition dump");

  // scenario-driven subcommands
  Common fields_common, sim_common, run_common, bench_common;
  std::string fields_scenario, sim_scenario, run_scenario_path,
      bench_scenario_path, updates_path, run_dump_partition;

  CLI::App* fields = app.add_subcommand(
      "fields", "precompute and export the static relation fields");
  fields->add_option("--scenario", fields_scenario, "scenario file")
      ->required();
  add_common(fields, fields_common);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate the update stream without running the circuit");
  simulate->add_option("--scenario", sim_scenario, "scenario file")
      ->required();
  add_common(simulate, sim_common);

  CLI::App* run = app.add_subcommand(
      "run", "run the full pipeline and maintain the landscape");
  run->add_option("--scenario", run_scenario_path, "scenario file")
      ->required();
  run->add_option("--updates", updates_path,
                  "replay a recorded update stream instead of generators");
  run->add_option("--dump-partition", run_dump_partition,
                  "write the final partition to this file");
  add_common(run, run_common);

  CLI::App* bench = app.add_subcommand(
      "bench", "compare reactive against full re-evaluation");
  bench->add_option("--scenario", bench_scenario_path, "scenario file")
      ->required();
  add_common(bench, bench_common);

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) {
    rml_program* program = nullptr;
    rml_status status = rml_program_parse_file(check_file.c_str(), &program);
    if (status != RML_OK) return report_failure(status);
    std::unique_ptr<rml_program, decltype(&rml_program_free)> guard(
        program, &rml_program_free);
    int issues = 0;
    StringOut report;
    status = rml_program_validate(program, &issues, &report.text);
    if (status != RML_OK) return report_failure(status);
    if (issues > 0) {
      std::fprintf(stderr, "%s", report.text);
      std::fprintf(stderr, "%d issue(s) found\n", issues);
      return kExitValidation;
    }
    std::printf("ok\n");
    return kExitOk;
  }

  if (compile->parsed()) {
    rml_program* program = nullptr;
    rml_status status = rml_program_parse_file(compile_file.c_str(), &program);
    if (status != RML_OK) return report_failure(status);
    std::unique_ptr<rml_program, decltype(&rml_program_free)> guard(
        program, &rml_program_free);
    int issues = 0;
    status = rml_program_validate(program, &issues, nullptr);
    if (status != RML_OK) return report_failure(status);
    if (issues > 0) {
      std::fprintf(stderr, "error: program fails validation (run 'check')\n");
      return kExitValidation;
    }
    rml_circuit* circuit = nullptr;
    status = rml_circuit_compile(program, &circuit);
    if (status != RML_OK) return report_failure(status);
    std::unique_ptr<rml_circuit, decltype(&rml_circuit_free)> circuit_guard(
        circuit, &rml_circuit_free);
    uint64_t nodes = 0;
    int64_t ops = 0;
    double worlds = 0;
    rml_circuit_stats(circuit, &nodes, &ops, &worlds);
    std::printf("nodes=%llu ops=%lld worlds=%.0f\n",
                (unsigned long long)nodes, (long long)ops, worlds);
    if (!dump_circuit_path.empty()) {
      StringOut dump;
      status = rml_circuit_dump(circuit, &dump.text);
      if (status != RML_OK) return report_failure(status);
      if (!write_file(dump_circuit_path, dump.text)) {
        std::fprintf(stderr, "error: cannot write %s\n",
                     dump_circuit_path.c_str());
        return kExitRuntime;
      }
    }
    if (!dump_partition_path.empty()) {
      StringOut dump;
      status = rml_circuit_dump_partition(
          circuit, clusters.empty() ? nullptr : clusters.c_str(),
          compile_width, compile_cells, &dump.text);
      if (status != RML_OK) return report_failure(status);
      if (!write_file(dump_partition_path, dump.text)) {
        std::fprintf(stderr, "error: cannot write %s\n",
                     dump_partition_path.c_str());
        return kExitRuntime;
      }
    }
    return kExitOk;
  }

  if (fields->parsed()) {
    return with_scenario(fields_scenario, fields_common, &rml_fields,
                         "fields written");
  }
  if (simulate->parsed()) {
    return with_scenario(sim_scenario, sim_common, &rml_simulate,
                         "update stream written");
  }
  if (run->parsed()) {
    rml_scenario* raw = nullptr;
    rml_status status = rml_scenario_load(run_scenario_path.c_str(), &raw);
    if (status != RML_OK) return report_failure(status);
    ScenarioPtr scenario(raw, &rml_scenario_free);
    rml_run_options options = run_common.options();
    if (!updates_path.empty()) options.updates_path = updates_path.c_str();
    if (!run_dump_partition.empty())
      options.dump_partition_path = run_dump_partition.c_str();
    StringOut summary;
    status = rml_run(scenario.get(), &options, &summary.text);
    if (status != RML_OK) return report_failure(status);
    std::printf("run complete\n%s\n", summary.text);
    return kExitOk;
  }
  if (bench->parsed()) {
    return with_scenario(bench_scenario_path, bench_common, &rml_bench,
                         "bench complete");
  }
  return kExitRuntime;
}
