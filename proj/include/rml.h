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

/*
 * C interface of the reactive mission landscape engine.
 *
 * All objects are opaque handles created and destroyed here. Functions
 * return RML_OK or an error code; rml_last_error() returns a thread-local
 * message for the most recent failure on the calling thread. Strings
 * returned through char** are heap-allocated and released with
 * rml_string_free().
 */

#ifndef RML_H
#define RML_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rml_status {
  RML_OK = 0,
  RML_ERR_INVALID_ARGUMENT = 1,
  RML_ERR_PARSE = 2,
  RML_ERR_VALIDATION = 3,
  RML_ERR_IO = 4,
  RML_ERR_BUDGET = 5,
  RML_ERR_RUNTIME = 6
} rml_status;

const char* rml_version(void);
const char* rml_last_error(void);
void rml_string_free(char* text);

typedef struct rml_program rml_program;
typedef struct rml_circuit rml_circuit;
typedef struct rml_scenario rml_scenario;

/* ---- rule programs (.resin) ------------------------------------------- */

rml_status rml_program_parse_file(const char* path, rml_program** out);
rml_status rml_program_parse_text(const char* text, rml_program** out);
void rml_program_free(rml_program* program);

/* issue_count receives the number of invariant violations (0 == valid);
 * report receives one issue per line (empty string when valid). */
rml_status rml_program_validate(const rml_program* program, int* issue_count,
                                char** report);
rml_status rml_program_print(const rml_program* program, char** text);

/* ---- compiled circuits ------------------------------------------------- */

rml_status rml_circuit_compile(const rml_program* program, rml_circuit** out);
void rml_circuit_free(rml_circuit* circuit);
rml_status rml_circuit_stats(const rml_circuit* circuit, uint64_t* node_count,
                             int64_t* total_ops, double* world_count);
/* plain-text node listing: one node per line with children and op count */
rml_status rml_circuit_dump(const rml_circuit* circuit, char** text);
/* frequency partition summary; clusters_spec is NULL (all sources in
 * cluster 0) or a comma list "token=k,token=k" */
rml_status rml_circuit_dump_partition(const rml_circuit* circuit,
                                      const char* clusters_spec,
                                      double partition_width_hz, size_t cells,
                                      char** text);

/* ---- scenarios and pipeline runs --------------------------------------- */

rml_status rml_scenario_load(const char* path, rml_scenario** out);
void rml_scenario_free(rml_scenario* scenario);

typedef struct rml_run_options {
  int reactive;      /* 0: full re-evaluation per update */
  int virtual_clock; /* 0: pace against the wall clock */
  int has_seed;
  uint64_t seed;
  int has_partition_width;
  double partition_width_hz;
  int has_dwell;
  double dwell_s;
  int has_duration;
  double duration_s;
  int has_write_pgm;
  int write_pgm;
  const char* out_dir;             /* artifact directory */
  const char* updates_path;        /* replay a recorded update stream */
  const char* dump_partition_path; /* write the final partition here */
} rml_run_options;

void rml_run_options_init(rml_run_options* options);

/* Each call writes artifacts under options->out_dir and returns a JSON
 * summary through summary_json (optional; pass NULL to skip). */
rml_status rml_run(const rml_scenario* scenario,
                   const rml_run_options* options, char** summary_json);
rml_status rml_bench(const rml_scenario* scenario,
                     const rml_run_options* options, char** report_json);
rml_status rml_fields(const rml_scenario* scenario,
                      const rml_run_options* options, char** summary_json);
rml_status rml_simulate(const rml_scenario* scenario,
                        const rml_run_options* options, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* RML_H */
