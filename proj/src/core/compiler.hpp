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

// Grounds a validated program into an exact weighted-model-counting circuit.
//
// Each Probability channel becomes a Bernoulli world variable; each Density
// channel becomes one categorical variable over the intervals induced by its
// comparison thresholds. Comparisons on the same channel therefore share a
// variable — `d < 15` implies `d < 35` by construction, which independent
// Bernoullis would get wrong. The target's monotone Boolean function is
// Shannon-decomposed into a decision DAG and converted to a sum/product
// circuit whose root computes the exact model sum for any weight assignment.

#ifndef RML_CORE_COMPILER_HPP
#define RML_CORE_COMPILER_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/lang.hpp"
#include "core/mdd.hpp"

namespace rml::compiler {

struct WorldVariable {
  int id = -1;  // index in declaration order, stable across recompiles
  std::string token;
  lang::Atom atom;
  lang::Domain domain = lang::Domain::Probability;
  std::vector<double> cuts;  // ascending; empty for Bernoulli
  int arity = 2;             // 2 for Bernoulli, cuts+1 for categorical
};

enum class AcKind : uint8_t { Sum, Product, Indicator, Constant };

struct AcNode {
  AcKind kind;
  std::vector<int> kids;  // Sum/Product children, evaluated in listed order
  int var = -1;           // variable of Indicator and of decision Sum/Product
  int value = -1;         // Indicator value index
  double constant = 0.0;  // Constant payload
  int64_t ops = 0;        // scalar ops to evaluate this node once per cell
  int64_t mdd = -1;       // decision-diagram identity, -1 if none
};

/// Boolean functions of every atom, shared variable set and diagram manager.
struct BoolSemantics {
  mdd::ManagerPtr manager;
  std::vector<WorldVariable> vars;
  std::unordered_map<std::string, int> var_of_token;
  std::unordered_map<std::string, int> var_of_atom;   // atom key -> var id
  std::map<std::string, int> function_of_atom;        // atom key -> mdd id
  int target_function = mdd::kFalse;
  std::vector<int> order;  // var ids, root (fastest) first
  double world_count = 1.0;
};

struct CompileOptions {
  std::map<std::string, int> clusters;  // channel token -> cluster index
  double world_cap = double(1 << 20);
  mdd::ManagerPtr manager;  // reuse an existing unique table when set
};

/// Least-fixed-point Boolean semantics of every atom under the variable
/// order implied by `options.clusters` (higher cluster = closer to root,
/// ties by channel token). Requires a validated program.
BoolSemantics boolean_semantics(const lang::Program& program,
                                const CompileOptions& options = {});

struct WmcCircuit {
  std::shared_ptr<const lang::Program> program;
  mdd::ManagerPtr manager;
  std::vector<WorldVariable> vars;
  std::unordered_map<std::string, int> var_of_token;
  std::vector<int> order;        // var ids, root first
  std::vector<int> cluster;      // per var id, as compiled
  std::vector<AcNode> nodes;     // ids topological: kids precede parents
  int root = 0;
  int64_t total_ops = 0;
  double world_count = 1.0;
  int target_mdd = mdd::kFalse;

  const WorldVariable* var_for_token(std::string_view token) const;
};

/// Compiles the target function to an arithmetic circuit. Throws
/// VariableBudgetExceeded when the joint world count exceeds the cap and
/// InvalidProgram when validation reports issues.
WmcCircuit compile_wmc(const lang::Program& program,
                       const CompileOptions& options = {});

/// Converts an arbitrary diagram of the semantics into a circuit (used for
/// per-atom probabilities; compile_wmc uses it for the target).
WmcCircuit compile_function(const lang::Program& program,
                            const BoolSemantics& semantics, int function);

/// One weight vector per variable per cell; `w[var][cell * arity + value]`.
struct WeightGrid {
  size_t cells = 0;
  std::vector<std::vector<double>> w;

  static WeightGrid zeros(const WmcCircuit& circuit, size_t cells);
};

/// Per-cell root probabilities; deterministic accumulation order, so results
/// are bit-identical regardless of any external cell partitioning.
std::vector<double> evaluate(const WmcCircuit& circuit,
                             const WeightGrid& weights);

/// Evaluates a single cell given a flat per-variable weight lookup.
double evaluate_cell(std::span<const AcNode> nodes, int root,
                     const std::vector<std::vector<double>>& var_weights);

struct OpCount {
  int64_t total = 0;
  std::vector<int64_t> per_node;
};

OpCount opcount(const WmcCircuit& circuit);

/// Plain-text DAG listing, one node per line, stable across runs.
std::string dump_circuit(const WmcCircuit& circuit);

}  // namespace rml::compiler

#endif  // RML_CORE_COMPILER_HPP
