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

#include "core/circuit.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace rml::circuit {

using compiler::AcKind;
using compiler::AcNode;

ReactiveCircuit ReactiveCircuit::partition(
    const compiler::WmcCircuit& wmc, const std::map<std::string, int>& clusters,
    const ClusterConfig& config, size_t cells, double phi_epsilon) {
  ReactiveCircuit rc;
  rc.config_ = config;
  rc.phi_epsilon_ = phi_epsilon;
  rc.cells_ = cells;

  // Re-derive the circuit with the cluster-implied variable order, sharing
  // the diagram manager so structural identities survive restructuring.
  compiler::CompileOptions options;
  options.clusters = clusters;
  options.manager = wmc.manager;
  options.world_cap = std::numeric_limits<double>::infinity();
  rc.base_ = compiler::compile_wmc(*wmc.program, options);
  const auto& nodes = rc.base_.nodes;

  // Clusters present among decision nodes, ascending: slowest layer first.
  std::set<int> present;
  for (const auto& node : nodes) {
    if (node.var >= 0) present.insert(rc.base_.cluster[node.var]);
  }
  if (present.empty()) present.insert(0);  // constant circuit

  std::map<int, int> fnode_of_cluster;
  for (int cluster : present) {
    fnode_of_cluster[cluster] = static_cast<int>(rc.fnodes_.size());
    FormulaNode f;
    f.cluster = cluster;
    rc.fnodes_.push_back(std::move(f));
  }
  int n_fnodes = static_cast<int>(rc.fnodes_.size());

  rc.fnode_of_node_.assign(nodes.size(), -1);
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].var < 0) continue;  // constants stay global
    int f = fnode_of_cluster.at(rc.base_.cluster[nodes[i].var]);
    rc.fnode_of_node_[i] = f;
    rc.fnodes_[f].ac_nodes.push_back(static_cast<int>(i));
    rc.fnodes_[f].ops += nodes[i].ops;
  }
  // A constant root lives in the single degenerate layer.
  if (rc.fnode_of_node_[rc.base_.root] < 0) {
    rc.fnode_of_node_[rc.base_.root] = n_fnodes - 1;
    rc.fnodes_[n_fnodes - 1].ac_nodes.push_back(rc.base_.root);
  }

  // Cut points: nodes referenced across a layer boundary, plus the root.
  rc.output_slot_of_node_.assign(nodes.size(), -1);
  auto mark_output = [&](int id) {
    int f = rc.fnode_of_node_[id];
    if (f < 0) return;  // constants are preloaded everywhere
    if (rc.output_slot_of_node_[id] >= 0) return;
    rc.output_slot_of_node_[id] =
        static_cast<int>(rc.fnodes_[f].outputs.size());
    rc.fnodes_[f].outputs.push_back(id);
    rc.fnodes_[f].output_mdd.push_back(nodes[id].mdd);
  };
  mark_output(rc.base_.root);
  for (size_t i = 0; i < nodes.size(); ++i) {
    int f = rc.fnode_of_node_[i];
    for (int kid : nodes[i].kids) {
      int kf = rc.fnode_of_node_[kid];
      if (kf >= 0 && kf != f) mark_output(kid);
    }
  }
  for (size_t i = 0; i < nodes.size(); ++i) {
    int f = rc.fnode_of_node_[i];
    if (f < 0) continue;
    for (int kid : nodes[i].kids) {
      int kf = rc.fnode_of_node_[kid];
      if (kf >= 0 && kf != f) {
        auto& ext = rc.fnodes_[f].external_inputs;
        if (std::find(ext.begin(), ext.end(), kid) == ext.end())
          ext.push_back(kid);
        auto& inputs = rc.fnodes_[f].input_fnodes;
        if (std::find(inputs.begin(), inputs.end(), kf) == inputs.end())
          inputs.push_back(kf);
      }
    }
  }
  for (auto& f : rc.fnodes_) {
    std::sort(f.external_inputs.begin(), f.external_inputs.end());
    std::sort(f.input_fnodes.begin(), f.input_fnodes.end());
  }

  rc.root_fnode_ = rc.fnode_of_node_[rc.base_.root];
  rc.root_slot_ = rc.output_slot_of_node_[rc.base_.root];

  // Layer membership per variable. Variables folded out of the circuit are
  // absorbed by the root-side formula node: their (ineffective) updates
  // re-evaluate only the cheapest layer.
  size_t n_vars = rc.base_.vars.size();
  rc.fnode_of_var_.assign(n_vars, rc.root_fnode_);
  std::vector<char> var_present(n_vars, 0);
  for (const auto& node : nodes) {
    if (node.var >= 0) var_present[node.var] = 1;
  }
  for (size_t v = 0; v < n_vars; ++v) {
    if (var_present[v]) {
      rc.fnode_of_var_[v] = fnode_of_cluster.at(rc.base_.cluster[v]);
    } else {
      auto& direct = rc.fnodes_[rc.root_fnode_].direct_vars;
      direct.push_back(static_cast<int>(v));
    }
  }
  for (size_t v = 0; v < n_vars; ++v) {
    if (!var_present[v]) continue;
    rc.fnodes_[rc.fnode_of_var_[v]].direct_vars.push_back(static_cast<int>(v));
  }
  for (auto& f : rc.fnodes_) {
    std::sort(f.direct_vars.begin(), f.direct_vars.end());
    f.direct_vars.erase(std::unique(f.direct_vars.begin(), f.direct_vars.end()),
                        f.direct_vars.end());
  }

  // Dep(source) = formula nodes that transitively consume its layer.
  std::vector<std::vector<char>> consumes(n_fnodes,
                                          std::vector<char>(n_fnodes, 0));
  for (int f = 0; f < n_fnodes; ++f) {
    consumes[f][f] = 1;
    for (int g : rc.fnodes_[f].input_fnodes) {
      for (int k = 0; k < n_fnodes; ++k)
        if (consumes[g][k]) consumes[f][k] = 1;
    }
  }
  rc.dep_of_var_.assign(n_vars, {});
  for (size_t v = 0; v < n_vars; ++v) {
    int home = rc.fnode_of_var_[v];
    for (int f = 0; f < n_fnodes; ++f) {
      if (consumes[f][home]) rc.dep_of_var_[v].push_back(f);
    }
  }

  rc.total_ops_ = 0;
  for (const auto& f : rc.fnodes_) rc.total_ops_ += f.ops;

  rc.source_.resize(n_vars);
  rc.initialized_.assign(n_vars, 0);
  rc.memo_.resize(n_fnodes);
  rc.valid_.resize(n_fnodes);
  for (int f = 0; f < n_fnodes; ++f) {
    rc.memo_[f].assign(cells * rc.fnodes_[f].outputs.size(), 0.0);
    rc.valid_[f].assign(cells, 0);
  }
  rc.scratch_.assign(nodes.size(), 0.0);
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == AcKind::Constant) rc.scratch_[i] = nodes[i].constant;
  }
  rc.eval_counters_.assign(n_fnodes, 0);
  return rc;
}

int ReactiveCircuit::var_index(const std::string& token) const {
  auto it = base_.var_of_token.find(token);
  if (it == base_.var_of_token.end()) {
    fail(ErrorCode::UnknownChannel, "no source channel " + token);
  }
  return it->second;
}

int ReactiveCircuit::cluster_of_token(const std::string& token) const {
  return base_.cluster[var_index(token)];
}

std::vector<int> ReactiveCircuit::dep_of(const std::string& token) const {
  return dep_of_var_[var_index(token)];
}

int64_t ReactiveCircuit::dep_ops(const std::string& token) const {
  int64_t total = 0;
  for (int f : dep_of_var_[var_index(token)]) total += fnodes_[f].ops;
  return total;
}

void ReactiveCircuit::eval_fnode_cell(int fnode, size_t cell) {
  const FormulaNode& f = fnodes_[fnode];
  for (int ext : f.external_inputs) {
    int owner = fnode_of_node_[ext];
    int slot = output_slot_of_node_[ext];
    scratch_[ext] =
        memo_[owner][cell * fnodes_[owner].outputs.size() + slot];
  }
  const auto& nodes = base_.nodes;
  for (int id : f.ac_nodes) {
    const AcNode& node = nodes[id];
    switch (node.kind) {
      case AcKind::Constant:
        break;  // preloaded
      case AcKind::Indicator:
        scratch_[id] =
            source_[node.var][cell * base_.vars[node.var].arity + node.value];
        break;
      case AcKind::Sum: {
        double acc = 0.0;
        for (int kid : node.kids) acc += scratch_[kid];
        scratch_[id] = acc;
        break;
      }
      case AcKind::Product: {
        double acc = 1.0;
        for (int kid : node.kids) acc *= scratch_[kid];
        scratch_[id] = acc;
        break;
      }
    }
  }
  size_t stride = f.outputs.size();
  for (size_t j = 0; j < stride; ++j) {
    memo_[fnode][cell * stride + j] = scratch_[f.outputs[j]];
  }
}

void ReactiveCircuit::set_source(const std::string& token,
                                 std::span<const double> slice) {
  int var = var_index(token);
  size_t expected = cells_ * static_cast<size_t>(base_.vars[var].arity);
  if (slice.size() != expected) {
    fail(ErrorCode::ShapeMismatch,
         token + ": slice has " + std::to_string(slice.size()) +
             " values, expected " + std::to_string(expected));
  }
  source_[var].assign(slice.begin(), slice.end());
  initialized_[var] = 1;
  for (int f : dep_of_var_[var]) std::fill(valid_[f].begin(), valid_[f].end(), 0);
  primed_ = false;
}

std::vector<double> ReactiveCircuit::full_evaluate() {
  for (size_t v = 0; v < base_.vars.size(); ++v) {
    if (!initialized_[v]) {
      fail(ErrorCode::UninitializedSource,
           "source " + base_.vars[v].token + " was never set");
    }
  }
  for (size_t f = 0; f < fnodes_.size(); ++f) {
    for (size_t cell = 0; cell < cells_; ++cell) {
      eval_fnode_cell(static_cast<int>(f), cell);
    }
    std::fill(valid_[f].begin(), valid_[f].end(), 1);
    eval_counters_[f] += cells_;
  }
  primed_ = true;
  return root_grid();
}

std::vector<double> ReactiveCircuit::root_grid() const {
  std::vector<double> out(cells_);
  size_t stride = fnodes_[root_fnode_].outputs.size();
  for (size_t cell = 0; cell < cells_; ++cell) {
    out[cell] = memo_[root_fnode_][cell * stride + root_slot_];
  }
  return out;
}

UpdateResult ReactiveCircuit::apply_impl(const std::string& token,
                                         std::span<const uint32_t> cells,
                                         std::span<const double> packed,
                                         bool full_reval) {
  int var = var_index(token);
  int arity = base_.vars[var].arity;
  if (packed.size() != cells.size() * static_cast<size_t>(arity)) {
    fail(ErrorCode::ShapeMismatch,
         token + ": packed values do not match cells x arity");
  }
  for (uint32_t cell : cells) {
    if (cell >= cells_) {
      fail(ErrorCode::ShapeMismatch,
           token + ": cell " + std::to_string(cell) + " out of range");
    }
  }
  if (!primed_) {
    fail(ErrorCode::UninitializedSource,
         "apply_update before initial full_evaluate");
  }

  UpdateResult result;
  // Meaningful-change gate: maximum absolute parameter difference against
  // the currently accepted slice, strictly greater than epsilon. Rejected
  // updates leave no trace, so sub-threshold drift keeps accumulating
  // against the last accepted value until it crosses the gate.
  double max_diff = 0.0;
  const auto& current = source_[var];
  for (size_t i = 0; i < cells.size(); ++i) {
    size_t base = static_cast<size_t>(cells[i]) * arity;
    for (int value = 0; value < arity; ++value) {
      max_diff = std::max(max_diff, std::abs(packed[i * arity + value] -
                                             current[base + value]));
    }
  }
  if (max_diff <= phi_epsilon_) {
    result.skipped = true;
    return result;
  }

  auto& slice = source_[var];
  for (size_t i = 0; i < cells.size(); ++i) {
    size_t base = static_cast<size_t>(cells[i]) * arity;
    for (int value = 0; value < arity; ++value) {
      slice[base + value] = packed[i * arity + value];
    }
  }

  size_t root_stride = fnodes_[root_fnode_].outputs.size();
  std::vector<double> old_root(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    old_root[i] = memo_[root_fnode_][size_t(cells[i]) * root_stride + root_slot_];
  }

  if (full_reval) {
    for (size_t f = 0; f < fnodes_.size(); ++f) {
      for (size_t cell = 0; cell < cells_; ++cell)
        eval_fnode_cell(static_cast<int>(f), cell);
      eval_counters_[f] += cells_;
      result.recomputed_nodes.push_back(static_cast<int>(f));
    }
    result.ops = total_ops_ * static_cast<int64_t>(cells_);
    result.affected_cells = static_cast<uint32_t>(cells_);
  } else {
    for (int f : dep_of_var_[var]) {
      for (uint32_t cell : cells) eval_fnode_cell(f, cell);
      eval_counters_[f] += cells.size();
      result.ops += fnodes_[f].ops * static_cast<int64_t>(cells.size());
      result.recomputed_nodes.push_back(f);
    }
    result.affected_cells = static_cast<uint32_t>(cells.size());
  }

  for (size_t i = 0; i < cells.size(); ++i) {
    double now = memo_[root_fnode_][size_t(cells[i]) * root_stride + root_slot_];
    if (now != old_root[i]) result.changed_cells.push_back(cells[i]);
  }
  return result;
}

namespace {

std::vector<uint32_t> all_cells(size_t n) {
  std::vector<uint32_t> cells(n);
  std::iota(cells.begin(), cells.end(), 0u);
  return cells;
}

}  // namespace

UpdateResult ReactiveCircuit::apply_update(const std::string& token,
                                           std::span<const double> slice) {
  auto cells = all_cells(cells_);
  return apply_impl(token, cells, slice, false);
}

UpdateResult ReactiveCircuit::apply_update(const std::string& token,
                                           std::span<const uint32_t> cells,
                                           std::span<const double> values) {
  return apply_impl(token, cells, values, false);
}

UpdateResult ReactiveCircuit::apply_update_full(const std::string& token,
                                                std::span<const double> slice) {
  auto cells = all_cells(cells_);
  return apply_impl(token, cells, slice, true);
}

UpdateResult ReactiveCircuit::apply_update_full(
    const std::string& token, std::span<const uint32_t> cells,
    std::span<const double> values) {
  return apply_impl(token, cells, values, true);
}

GainReport ReactiveCircuit::gain(const std::map<std::string, double>& rates,
                                 double window_s) const {
  GainReport report;
  report.total_ops = total_ops_;
  report.cells = cells_;
  report.window_s = window_s;
  double numerator = 0.0;
  double denominator = 0.0;
  double rate_sum = 0.0;
  for (const auto& var : base_.vars) {
    double rate = 0.0;
    if (auto it = rates.find(var.token); it != rates.end()) rate = it->second;
    if (rate < 0.0) {
      fail(ErrorCode::InvalidArgument, "negative rate for " + var.token);
    }
    int64_t dep = 0;
    for (int f : dep_of_var_[var.id]) dep += fnodes_[f].ops;
    report.per_source.push_back(GainSourceEntry{var.token, rate, dep});
    numerator += rate * static_cast<double>(total_ops_);
    denominator += rate * static_cast<double>(dep);
    rate_sum += rate;
  }
  if (rate_sum <= 0.0) {
    fail(ErrorCode::AllRatesZero, "gain undefined: all source rates are zero");
  }
  report.rho = denominator > 0.0
                   ? numerator / denominator
                   : std::numeric_limits<double>::infinity();
  return report;
}

ReactiveCircuit ReactiveCircuit::repartition(
    const std::map<std::string, int>& clusters) const {
  ReactiveCircuit next =
      partition(base_, clusters, config_, cells_, phi_epsilon_);

  // Carry memo grids whose sub-formula identity survived the reordering.
  std::map<int64_t, std::pair<size_t, size_t>> carried_loc;  // fnode, slot
  for (size_t f = 0; f < fnodes_.size(); ++f) {
    for (size_t j = 0; j < fnodes_[f].outputs.size(); ++j) {
      int64_t key = fnodes_[f].output_mdd[j];
      if (key < 0) continue;
      carried_loc.emplace(key, std::make_pair(f, j));
    }
  }

  for (size_t f = 0; f < next.fnodes_.size(); ++f) {
    const FormulaNode& node = next.fnodes_[f];
    size_t stride = node.outputs.size();
    std::vector<std::pair<size_t, size_t>> sources_for_slot;
    bool all_found = true;
    for (size_t j = 0; j < stride; ++j) {
      int64_t key = node.output_mdd[j];
      auto it = key >= 0 ? carried_loc.find(key) : carried_loc.end();
      if (it == carried_loc.end()) {
        all_found = false;
        break;
      }
      sources_for_slot.push_back(it->second);
    }
    if (!all_found) continue;
    for (size_t cell = 0; cell < cells_; ++cell) {
      bool cell_valid = true;
      for (size_t j = 0; j < stride; ++j) {
        auto [of, oj] = sources_for_slot[j];
        next.memo_[f][cell * stride + j] =
            memo_[of][cell * fnodes_[of].outputs.size() + oj];
        cell_valid = cell_valid && valid_[of][cell];
      }
      next.valid_[f][cell] = cell_valid ? 1 : 0;
    }
  }

  next.source_ = source_;
  next.initialized_ = initialized_;

  bool all_initialized = std::all_of(initialized_.begin(), initialized_.end(),
                                     [](char c) { return c != 0; });
  if (primed_ && all_initialized) {
    for (size_t f = 0; f < next.fnodes_.size(); ++f) {
      for (size_t cell = 0; cell < cells_; ++cell) {
        if (next.valid_[f][cell]) continue;
        next.eval_fnode_cell(static_cast<int>(f), cell);
        next.valid_[f][cell] = 1;
        ++next.eval_counters_[f];
      }
    }
    next.primed_ = true;
  }
  return next;
}

std::string ReactiveCircuit::dump_partition() const {
  std::ostringstream out;
  out << "# partition h=" << lang::format_double(config_.partition_width_hz)
      << " fnodes=" << fnodes_.size() << " cells=" << cells_
      << " total_ops=" << total_ops_ << "\n";
  for (size_t f = 0; f < fnodes_.size(); ++f) {
    const FormulaNode& node = fnodes_[f];
    out << "fnode " << f << " cluster=" << node.cluster << " ops=" << node.ops
        << " nodes=" << node.ac_nodes.size() << " outputs=[";
    for (size_t j = 0; j < node.outputs.size(); ++j) {
      if (j) out << ",";
      out << node.outputs[j];
    }
    out << "] inputs=[";
    for (size_t j = 0; j < node.input_fnodes.size(); ++j) {
      if (j) out << ",";
      out << node.input_fnodes[j];
    }
    out << "] sources=[";
    bool first = true;
    for (int var : node.direct_vars) {
      if (!first) out << ",";
      out << base_.vars[var].token;
      first = false;
    }
    out << "]\n";
  }
  for (const auto& var : base_.vars) {
    out << "dep " << var.token << " cluster=" << base_.cluster[var.id]
        << " fnodes=[";
    const auto& dep = dep_of_var_[var.id];
    for (size_t j = 0; j < dep.size(); ++j) {
      if (j) out << ",";
      out << dep[j];
    }
    out << "] ops=" << dep_ops(var.token) << "\n";
  }
  out << "root fnode=" << root_fnode_ << " slot=" << root_slot_ << "\n";
  return out.str();
}

}  // namespace rml::circuit
