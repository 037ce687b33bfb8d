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

#include "rml.h"

#include <cstring>
#include <string>

#include "core/circuit.hpp"
#include "core/compiler.hpp"
#include "core/error.hpp"
#include "core/grid_io.hpp"
#include "core/lang.hpp"
#include "core/runner.hpp"
#include "core/scenario.hpp"

namespace {

thread_local std::string g_last_error;

rml_status status_of(rml::ErrorCode code) {
  using rml::ErrorCode;
  switch (code) {
    case ErrorCode::Syntax:
    case ErrorCode::DuplicateChannel:
    case ErrorCode::MultipleTargets:
    case ErrorCode::MissingTarget:
    case ErrorCode::UnknownAtom:
      return RML_ERR_PARSE;
    case ErrorCode::InvalidProgram:
      return RML_ERR_VALIDATION;
    case ErrorCode::Io:
    case ErrorCode::MalformedRecord:
      return RML_ERR_IO;
    case ErrorCode::VariableBudgetExceeded:
      return RML_ERR_BUDGET;
    case ErrorCode::InvalidArgument:
      return RML_ERR_INVALID_ARGUMENT;
    default:
      return RML_ERR_RUNTIME;
  }
}

template <typename Fn>
rml_status guarded(Fn&& fn) {
  try {
    fn();
    return RML_OK;
  } catch (const rml::Error& e) {
    g_last_error = std::string(rml::error_code_name(e.code())) + ": " +
                   e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RML_ERR_RUNTIME;
  }
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

rml_status invalid_argument(const char* what) {
  g_last_error = std::string("InvalidArgument: ") + what;
  return RML_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct rml_program {
  rml::lang::Program program;
};

struct rml_circuit {
  rml::compiler::WmcCircuit circuit;
};

struct rml_scenario {
  rml::run::Scenario scenario;
};

extern "C" {

const char* rml_version(void) { return "0.1.0"; }

const char* rml_last_error(void) { return g_last_error.c_str(); }

void rml_string_free(char* text) { std::free(text); }

rml_status rml_program_parse_text(const char* text, rml_program** out) {
  if (!text || !out) return invalid_argument("null argument");
  return guarded([&] {
    auto* handle = new rml_program{rml::lang::parse_program(text)};
    *out = handle;
  });
}

rml_status rml_program_parse_file(const char* path, rml_program** out) {
  if (!path || !out) return invalid_argument("null argument");
  return guarded([&] {
    std::string text = rml::grid_io::read_text_file(path);
    *out = new rml_program{rml::lang::parse_program(text)};
  });
}

void rml_program_free(rml_program* program) { delete program; }

rml_status rml_program_validate(const rml_program* program, int* issue_count,
                                char** report) {
  if (!program) return invalid_argument("null program");
  return guarded([&] {
    rml::lang::ValidationReport result = rml::lang::validate(program->program);
    if (issue_count) *issue_count = static_cast<int>(result.issues.size());
    if (report) *report = dup_string(result.to_string());
  });
}

rml_status rml_program_print(const rml_program* program, char** text) {
  if (!program || !text) return invalid_argument("null argument");
  return guarded(
      [&] { *text = dup_string(rml::lang::print_program(program->program)); });
}

rml_status rml_circuit_compile(const rml_program* program, rml_circuit** out) {
  if (!program || !out) return invalid_argument("null argument");
  return guarded([&] {
    *out = new rml_circuit{rml::compiler::compile_wmc(program->program)};
  });
}

void rml_circuit_free(rml_circuit* circuit) { delete circuit; }

rml_status rml_circuit_stats(const rml_circuit* circuit, uint64_t* node_count,
                             int64_t* total_ops, double* world_count) {
  if (!circuit) return invalid_argument("null circuit");
  if (node_count) *node_count = circuit->circuit.nodes.size();
  if (total_ops) *total_ops = circuit->circuit.total_ops;
  if (world_count) *world_count = circuit->circuit.world_count;
  return RML_OK;
}

rml_status rml_circuit_dump(const rml_circuit* circuit, char** text) {
  if (!circuit || !text) return invalid_argument("null argument");
  return guarded(
      [&] { *text = dup_string(rml::compiler::dump_circuit(circuit->circuit)); });
}

rml_status rml_circuit_dump_partition(const rml_circuit* circuit,
                                      const char* clusters_spec,
                                      double partition_width_hz, size_t cells,
                                      char** text) {
  if (!circuit || !text) return invalid_argument("null argument");
  return guarded([&] {
    std::map<std::string, int> clusters;
    if (clusters_spec && *clusters_spec) {
      std::string spec(clusters_spec);
      size_t pos = 0;
      while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        std::string item = spec.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        size_t eq = item.find('=');
        if (eq == std::string::npos) {
          rml::fail(rml::ErrorCode::InvalidArgument,
                    "clusters spec items must look like token=k");
        }
        clusters[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
    rml::circuit::ClusterConfig config;
    if (partition_width_hz > 0) config.partition_width_hz = partition_width_hz;
    auto rc = rml::circuit::ReactiveCircuit::partition(
        circuit->circuit, clusters, config, cells == 0 ? 1 : cells);
    *text = dup_string(rc.dump_partition());
  });
}

rml_status rml_scenario_load(const char* path, rml_scenario** out) {
  if (!path || !out) return invalid_argument("null argument");
  return guarded(
      [&] { *out = new rml_scenario{rml::run::load_scenario(path)}; });
}

void rml_scenario_free(rml_scenario* scenario) { delete scenario; }

void rml_run_options_init(rml_run_options* options) {
  if (!options) return;
  std::memset(options, 0, sizeof(*options));
  options->reactive = 1;
  options->virtual_clock = 1;
  options->out_dir = "out";
}

}  // extern "C"

namespace {

rml::run::RunOptions to_core_options(const rml_run_options* options) {
  rml::run::RunOptions out;
  if (!options) return out;
  out.reactive = options->reactive != 0;
  out.virtual_clock = options->virtual_clock != 0;
  if (options->has_seed) out.seed = options->seed;
  if (options->has_partition_width)
    out.partition_width_hz = options->partition_width_hz;
  if (options->has_dwell) out.dwell_s = options->dwell_s;
  if (options->has_duration) out.duration_s = options->duration_s;
  if (options->has_write_pgm) out.write_pgm = options->write_pgm != 0;
  if (options->out_dir) out.out_dir = options->out_dir;
  if (options->updates_path) out.updates_path = options->updates_path;
  if (options->dump_partition_path)
    out.dump_partition_path = options->dump_partition_path;
  return out;
}

}  // namespace

extern "C" {

rml_status rml_run(const rml_scenario* scenario,
                   const rml_run_options* options, char** summary_json) {
  if (!scenario) return invalid_argument("null scenario");
  return guarded([&] {
    auto stats =
        rml::run::run_scenario(scenario->scenario, to_core_options(options));
    if (summary_json) *summary_json = dup_string(stats.to_json());
  });
}

rml_status rml_bench(const rml_scenario* scenario,
                     const rml_run_options* options, char** report_json) {
  if (!scenario) return invalid_argument("null scenario");
  return guarded([&] {
    auto stats =
        rml::run::bench_scenario(scenario->scenario, to_core_options(options));
    if (report_json) *report_json = dup_string(stats.to_json());
  });
}

rml_status rml_fields(const rml_scenario* scenario,
                      const rml_run_options* options, char** summary_json) {
  if (!scenario) return invalid_argument("null scenario");
  return guarded([&] {
    auto stats =
        rml::run::compute_fields(scenario->scenario, to_core_options(options));
    if (summary_json) *summary_json = dup_string(stats.to_json());
  });
}

rml_status rml_simulate(const rml_scenario* scenario,
                        const rml_run_options* options, char** summary_json) {
  if (!scenario) return invalid_argument("null scenario");
  return guarded([&] {
    auto stats = rml::run::simulate_stream(scenario->scenario,
                                           to_core_options(options));
    if (summary_json) *summary_json = dup_string(stats.to_json());
  });
}

}  // extern "C"
