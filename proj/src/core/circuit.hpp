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

// Reactive evaluation of a compiled circuit over a cell grid.
//
// The circuit is re-derived with variables ordered by update-frequency
// cluster: the fastest cluster decides at the root, the slowest sits
// deepest. Cutting the node DAG at the frontiers between consecutive
// clusters yields one formula node per cluster layer, each with per-cell
// memo grids. An update to a source then re-evaluates exactly the formula
// nodes reachable from it — for fast signals that is the small root-side
// layer, while the expensive slow-signal sub-formulas stay memoized.

#ifndef RML_CORE_CIRCUIT_HPP
#define RML_CORE_CIRCUIT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/compiler.hpp"

namespace rml::circuit {

struct ClusterConfig {
  double partition_width_hz = 0.5;  // h
  int max_clusters = 8;
  double dwell_s = 5.0;  // hysteresis before restructuring
};

struct UpdateResult {
  bool skipped = false;          // rejected by the meaningful-change gate
  int64_t ops = 0;               // scalar ops spent on recomputation
  uint32_t affected_cells = 0;   // cells recomputed per formula node
  std::vector<int> recomputed_nodes;      // formula node indices, ascending
  std::vector<uint32_t> changed_cells;    // root cells whose value changed
};

struct GainSourceEntry {
  std::string token;
  double rate_hz = 0.0;
  int64_t dep_ops = 0;  // per-cell ops over the source's dependency cone
};

struct GainReport {
  double rho = 0.0;        // efficiency ratio, full cost over reactive cost
  int64_t total_ops = 0;   // per-cell ops of a full evaluation
  size_t cells = 0;
  double window_s = 0.0;   // span the rates were measured over
  std::vector<GainSourceEntry> per_source;
};

struct FormulaNode {
  int cluster = 0;
  std::vector<int> ac_nodes;       // owned circuit nodes, ascending
  std::vector<int> outputs;        // memoized node ids (cut points)
  std::vector<int64_t> output_mdd; // structural identity per output
  std::vector<int> external_inputs;  // node ids read from deeper layers
  std::vector<int> input_fnodes;     // deeper formula nodes consumed
  std::vector<int> direct_vars;      // variables deciding in this layer
  int64_t ops = 0;                   // per-cell evaluation cost
};

class ReactiveCircuit {
 public:
  /// Re-derives the circuit under the cluster-implied variable order and
  /// cuts it into per-cluster formula nodes with per-cell memo grids.
  static ReactiveCircuit partition(const compiler::WmcCircuit& wmc,
                                   const std::map<std::string, int>& clusters,
                                   const ClusterConfig& config, size_t cells,
                                   double phi_epsilon = 0.003);

  /// Stores a source slice without recomputation (initial priming);
  /// invalidates the dependency cone. Slice layout: cell * arity + value.
  void set_source(const std::string& token, std::span<const double> slice);

  /// Full-slice update. Applies the meaningful-change gate, stores the
  /// slice, and re-evaluates exactly the formula nodes in the source's
  /// dependency cone. Requires a prior full_evaluate.
  UpdateResult apply_update(const std::string& token,
                            std::span<const double> slice);

  /// Sparse update: values packed per listed cell (cells.size() * arity).
  UpdateResult apply_update(const std::string& token,
                            std::span<const uint32_t> cells,
                            std::span<const double> values);

  /// Reference mode: same gate and storage, but recomputes every formula
  /// node over every cell (cost = total_ops * cells). Outputs match the
  /// reactive path bit for bit.
  UpdateResult apply_update_full(const std::string& token,
                                 std::span<const double> slice);
  UpdateResult apply_update_full(const std::string& token,
                                 std::span<const uint32_t> cells,
                                 std::span<const double> values);

  /// Recomputes every formula node over every cell; all memos valid after.
  /// Throws UninitializedSource if any source was never set.
  std::vector<double> full_evaluate();

  /// Current root memo (valid after full_evaluate / apply_update).
  std::vector<double> root_grid() const;

  GainReport gain(const std::map<std::string, double>& rates,
                  double window_s = 0.0) const;

  /// New circuit over the same program under a new clustering; memoized
  /// grids whose sub-formula survived the restructuring are carried over
  /// and only the rest is recomputed.
  ReactiveCircuit repartition(const std::map<std::string, int>& clusters) const;

  // Introspection.
  size_t cells() const { return cells_; }
  int64_t total_ops() const { return total_ops_; }
  const std::vector<FormulaNode>& formula_nodes() const { return fnodes_; }
  const std::vector<compiler::WorldVariable>& vars() const {
    return base_.vars;
  }
  const compiler::WmcCircuit& base() const { return base_; }
  int cluster_of_token(const std::string& token) const;
  /// Formula nodes recomputed when this source changes, ascending.
  std::vector<int> dep_of(const std::string& token) const;
  int64_t dep_ops(const std::string& token) const;
  /// Cell evaluations per formula node since construction.
  const std::vector<uint64_t>& eval_counters() const { return eval_counters_; }
  bool primed() const { return primed_; }
  double phi_epsilon() const { return phi_epsilon_; }
  const ClusterConfig& config() const { return config_; }

  std::string dump_partition() const;

  ReactiveCircuit() = default;  // empty shell; use partition()

 private:
  int var_index(const std::string& token) const;  // throws UnknownChannel
  void eval_fnode_cell(int fnode, size_t cell);
  UpdateResult apply_impl(const std::string& token,
                          std::span<const uint32_t> cells,
                          std::span<const double> packed_values,
                          bool full_reval);

  compiler::WmcCircuit base_;
  ClusterConfig config_;
  double phi_epsilon_ = 0.003;
  size_t cells_ = 0;
  int64_t total_ops_ = 0;

  std::vector<FormulaNode> fnodes_;       // deepest (slowest) first
  std::vector<int> fnode_of_node_;        // per node id, -1 for constants
  std::vector<int> output_slot_of_node_;  // slot within owning fnode, -1
  std::vector<int> fnode_of_var_;         // layer whose update cone starts here
  std::vector<std::vector<int>> dep_of_var_;  // ascending fnode indices
  int root_fnode_ = 0;
  int root_slot_ = 0;

  std::vector<std::vector<double>> source_;  // per var: cells * arity
  std::vector<char> initialized_;
  std::vector<std::vector<double>> memo_;    // per fnode: cells * outputs
  std::vector<std::vector<char>> valid_;     // per fnode: cells
  bool primed_ = false;

  std::vector<double> scratch_;  // node value workspace, constants preloaded
  std::vector<uint64_t> eval_counters_;
};

}  // namespace rml::circuit

#endif  // RML_CORE_CIRCUIT_HPP
