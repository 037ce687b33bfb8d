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

#include "core/compiler.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

#include "core/error.hpp"

namespace rml::compiler {

namespace {

// Value indices of a categorical variable satisfying `interval OP cut`.
// Interval i spans (cuts[i-1], cuts[i]); strict and weak inequalities are
// identified (continuous densities make ties measure-zero).
std::vector<char> satisfied_intervals(const std::vector<double>& cuts,
                                      lang::CmpOp op, double threshold) {
  size_t n = cuts.size();
  std::vector<char> sat(n + 1, 0);
  // Position k of the threshold among the cuts: cuts[k] == threshold.
  size_t k = n;
  for (size_t i = 0; i < n; ++i) {
    if (cuts[i] == threshold) {
      k = i;
      break;
    }
  }
  assert(k < n && "comparison threshold missing from collected cuts");
  bool below = (op == lang::CmpOp::Lt || op == lang::CmpOp::Le);
  for (size_t i = 0; i <= n; ++i) {
    sat[i] = below ? (i <= k) : (i > k);
  }
  return sat;
}

std::vector<int> topo_sorted_heads(const lang::Program& program) {
  // Kahn's algorithm over derived-head dependencies; validation guarantees
  // acyclicity.
  std::vector<lang::Atom> heads;
  for (const auto& rule : program.rules) {
    if (std::find(heads.begin(), heads.end(), rule.head) == heads.end())
      heads.push_back(rule.head);
  }
  auto index_of = [&](const lang::Atom& atom) -> int {
    for (size_t i = 0; i < heads.size(); ++i)
      if (heads[i] == atom) return static_cast<int>(i);
    return -1;
  };
  std::vector<std::vector<int>> needs(heads.size());
  for (const auto& rule : program.rules) {
    int head_idx = index_of(rule.head);
    for (const auto& lit : rule.body) {
      const lang::Atom* atom = std::get_if<lang::Atom>(&lit);
      if (!atom || program.source_for_atom(*atom)) continue;
      int dep_idx = index_of(*atom);
      if (dep_idx >= 0 && dep_idx != head_idx)
        needs[head_idx].push_back(dep_idx);
    }
  }
  std::vector<int> order;
  std::vector<char> done(heads.size(), 0);
  std::function<void(int)> visit = [&](int i) {
    if (done[i]) return;
    done[i] = 1;
    for (int dep : needs[i]) visit(dep);
    order.push_back(i);
  };
  for (size_t i = 0; i < heads.size(); ++i) visit(static_cast<int>(i));

  // Map back to rule-head order used by callers: return indices into heads.
  return order;
}

void require_valid(const lang::Program& program) {
  lang::ValidationReport report = lang::validate(program);
  if (!report.ok()) {
    fail(ErrorCode::InvalidProgram,
         "program fails validation:\n" + report.to_string());
  }
}

}  // namespace

BoolSemantics boolean_semantics(const lang::Program& program,
                                const CompileOptions& options) {
  require_valid(program);

  BoolSemantics sem;
  sem.manager = options.manager ? options.manager
                                : std::make_shared<mdd::Manager>();

  auto thresholds = lang::collect_thresholds(program);
  for (const auto& decl : program.sources) {
    WorldVariable var;
    var.id = static_cast<int>(sem.vars.size());
    var.token = decl.token;
    var.atom = decl.atom;
    var.domain = decl.domain;
    if (decl.domain == lang::Domain::Density) {
      var.cuts = thresholds[decl.token];
      var.arity = static_cast<int>(var.cuts.size()) + 1;
    } else {
      var.arity = 2;
    }
    sem.var_of_token[var.token] = var.id;
    sem.var_of_atom[var.atom.key()] = var.id;
    sem.world_count *= var.arity;
    sem.vars.push_back(std::move(var));
  }
  if (sem.world_count > options.world_cap) {
    fail(ErrorCode::VariableBudgetExceeded,
         "joint world count " + lang::format_double(sem.world_count) +
             " exceeds cap " + lang::format_double(options.world_cap));
  }

  // Root-to-leaf order: faster clusters first, ties by channel token. Slow
  // signals end up deepest, where their sub-formulas stay memoizable.
  sem.order.resize(sem.vars.size());
  for (size_t i = 0; i < sem.vars.size(); ++i)
    sem.order[i] = static_cast<int>(i);
  auto cluster_of_var = [&](int id) {
    auto it = options.clusters.find(sem.vars[id].token);
    return it == options.clusters.end() ? 0 : it->second;
  };
  std::sort(sem.order.begin(), sem.order.end(), [&](int a, int b) {
    int ca = cluster_of_var(a);
    int cb = cluster_of_var(b);
    if (ca != cb) return ca > cb;
    return sem.vars[a].token < sem.vars[b].token;
  });
  std::vector<int> position(sem.vars.size());
  std::vector<int> arity(sem.vars.size());
  for (size_t level = 0; level < sem.order.size(); ++level)
    position[sem.order[level]] = static_cast<int>(level);
  for (size_t i = 0; i < sem.vars.size(); ++i) arity[i] = sem.vars[i].arity;

  mdd::Builder builder(*sem.manager, position, arity);

  auto literal_function = [&](const lang::BodyLiteral& lit) -> int {
    if (const lang::Atom* atom = std::get_if<lang::Atom>(&lit)) {
      if (auto it = sem.var_of_atom.find(atom->key());
          it != sem.var_of_atom.end()) {
        return builder.literal_true(it->second);
      }
      return sem.function_of_atom.at(atom->key());
    }
    const auto& cmp = std::get<lang::Comparison>(lit);
    int var = sem.var_of_atom.at(cmp.channel.key());
    auto sat = satisfied_intervals(sem.vars[var].cuts, cmp.op, cmp.threshold);
    return builder.literal_in(var, sat);
  };

  // Heads in dependency order so every body literal is already defined.
  std::vector<lang::Atom> heads;
  for (const auto& rule : program.rules) {
    if (std::find(heads.begin(), heads.end(), rule.head) == heads.end())
      heads.push_back(rule.head);
  }
  for (int idx : topo_sorted_heads(program)) {
    const lang::Atom& head = heads[idx];
    int f = mdd::kFalse;
    for (const auto& rule : program.rules) {
      if (!(rule.head == head)) continue;
      int conj = mdd::kTrue;
      for (const auto& lit : rule.body)
        conj = builder.mdd_and(conj, literal_function(lit));
      f = builder.mdd_or(f, conj);
    }
    sem.function_of_atom[head.key()] = f;
  }
  for (const auto& decl : program.sources) {
    if (decl.domain == lang::Domain::Probability &&
        !sem.function_of_atom.count(decl.atom.key())) {
      sem.function_of_atom[decl.atom.key()] =
          builder.literal_true(sem.var_of_atom.at(decl.atom.key()));
    }
  }

  if (auto it = sem.function_of_atom.find(program.target.key());
      it != sem.function_of_atom.end()) {
    sem.target_function = it->second;
  } else {
    // Target is a bare Probability source atom.
    sem.target_function =
        builder.literal_true(sem.var_of_atom.at(program.target.key()));
  }
  return sem;
}

namespace {

class AcBuilder {
 public:
  explicit AcBuilder(const mdd::Manager& manager) : manager_(manager) {
    nodes_.push_back(AcNode{AcKind::Constant, {}, -1, -1, 0.0, 0, -1});
    nodes_.push_back(AcNode{AcKind::Constant, {}, -1, -1, 1.0, 0, -1});
  }

  int build(int mdd_id) {
    if (mdd_id == mdd::kFalse) return 0;
    if (mdd_id == mdd::kTrue) return 1;
    if (auto it = ac_of_.find(mdd_id); it != ac_of_.end()) return it->second;

    const mdd::Node& node = manager_.node(mdd_id);
    int var = node.var;
    std::vector<int> terms;
    for (size_t value = 0; value < node.kids.size(); ++value) {
      int kid = build(node.kids[value]);
      if (kid == 0) continue;  // zero branch contributes nothing
      int ind = indicator(var, static_cast<int>(value));
      terms.push_back(kid == 1 ? ind : intern(AcKind::Product, {ind, kid}, var));
    }
    int result;
    if (terms.empty()) {
      result = 0;
    } else if (terms.size() == 1) {
      result = terms.front();
    } else {
      result = intern(AcKind::Sum, std::move(terms), var);
    }
    ac_of_.emplace(mdd_id, result);
    if (result > 1 && nodes_[result].mdd < 0) nodes_[result].mdd = mdd_id;
    return result;
  }

  std::vector<AcNode> take_nodes() { return std::move(nodes_); }

 private:
  int indicator(int var, int value) {
    uint64_t key = (static_cast<uint64_t>(var) << 32) |
                   static_cast<uint32_t>(value);
    if (auto it = indicator_of_.find(key); it != indicator_of_.end())
      return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(AcNode{AcKind::Indicator, {}, var, value, 0.0, 0, -1});
    indicator_of_.emplace(key, id);
    return id;
  }

  int intern(AcKind kind, std::vector<int> kids, int var) {
    std::vector<int> key;
    key.reserve(kids.size() + 2);
    key.push_back(kind == AcKind::Sum ? -2 : -3);
    key.insert(key.end(), kids.begin(), kids.end());
    if (auto it = struct_of_.find(key); it != struct_of_.end())
      return it->second;
    int id = static_cast<int>(nodes_.size());
    AcNode node;
    node.kind = kind;
    node.kids = std::move(kids);
    node.var = var;
    node.ops = static_cast<int64_t>(node.kids.size()) - 1;
    nodes_.push_back(std::move(node));
    struct_of_.emplace(std::move(key), id);
    return id;
  }

  struct VecHash {
    size_t operator()(const std::vector<int>& key) const {
      size_t h = 0xcbf29ce484222325ull;
      for (int v : key) h = (h ^ static_cast<size_t>(v)) * 0x100000001b3ull;
      return h;
    }
  };

  const mdd::Manager& manager_;
  std::vector<AcNode> nodes_;
  std::unordered_map<int, int> ac_of_;
  std::unordered_map<uint64_t, int> indicator_of_;
  std::unordered_map<std::vector<int>, int, VecHash> struct_of_;
};

}  // namespace

WmcCircuit compile_function(const lang::Program& program,
                            const BoolSemantics& semantics, int function) {
  WmcCircuit circuit;
  circuit.program = std::make_shared<lang::Program>(program);
  circuit.manager = semantics.manager;
  circuit.vars = semantics.vars;
  circuit.var_of_token = semantics.var_of_token;
  circuit.order = semantics.order;
  circuit.world_count = semantics.world_count;
  circuit.target_mdd = function;

  AcBuilder builder(*semantics.manager);
  circuit.root = builder.build(function);
  circuit.nodes = builder.take_nodes();
  circuit.total_ops = 0;
  for (const auto& node : circuit.nodes) circuit.total_ops += node.ops;
  circuit.cluster.assign(circuit.vars.size(), 0);
  return circuit;
}

WmcCircuit compile_wmc(const lang::Program& program,
                       const CompileOptions& options) {
  BoolSemantics sem = boolean_semantics(program, options);
  WmcCircuit circuit = compile_function(program, sem, sem.target_function);
  for (size_t i = 0; i < circuit.vars.size(); ++i) {
    auto it = options.clusters.find(circuit.vars[i].token);
    circuit.cluster[i] = it == options.clusters.end() ? 0 : it->second;
  }
  return circuit;
}

const WorldVariable* WmcCircuit::var_for_token(std::string_view token) const {
  auto it = var_of_token.find(std::string(token));
  return it == var_of_token.end() ? nullptr : &vars[it->second];
}

WeightGrid WeightGrid::zeros(const WmcCircuit& circuit, size_t cells) {
  WeightGrid grid;
  grid.cells = cells;
  grid.w.resize(circuit.vars.size());
  for (size_t i = 0; i < circuit.vars.size(); ++i)
    grid.w[i].assign(cells * circuit.vars[i].arity, 0.0);
  return grid;
}

double evaluate_cell(std::span<const AcNode> nodes, int root,
                     const std::vector<std::vector<double>>& var_weights) {
  std::vector<double> vals(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    const AcNode& node = nodes[i];
    switch (node.kind) {
      case AcKind::Constant:
        vals[i] = node.constant;
        break;
      case AcKind::Indicator:
        vals[i] = var_weights[node.var][node.value];
        break;
      case AcKind::Sum: {
        double acc = 0.0;
        for (int kid : node.kids) acc += vals[kid];
        vals[i] = acc;
        break;
      }
      case AcKind::Product: {
        double acc = 1.0;
        for (int kid : node.kids) acc *= vals[kid];
        vals[i] = acc;
        break;
      }
    }
  }
  return vals[root];
}

std::vector<double> evaluate(const WmcCircuit& circuit,
                             const WeightGrid& weights) {
  if (weights.w.size() != circuit.vars.size()) {
    fail(ErrorCode::ShapeMismatch,
         "weight grid has " + std::to_string(weights.w.size()) +
             " variables, circuit has " + std::to_string(circuit.vars.size()));
  }
  for (size_t i = 0; i < circuit.vars.size(); ++i) {
    if (weights.w[i].size() !=
        weights.cells * static_cast<size_t>(circuit.vars[i].arity)) {
      fail(ErrorCode::ShapeMismatch,
           "weight grid for " + circuit.vars[i].token +
               " does not match cells x arity");
    }
  }

  std::vector<double> out(weights.cells);
  std::vector<double> vals(circuit.nodes.size());
  for (size_t cell = 0; cell < weights.cells; ++cell) {
    for (size_t i = 0; i < circuit.nodes.size(); ++i) {
      const AcNode& node = circuit.nodes[i];
      switch (node.kind) {
        case AcKind::Constant:
          vals[i] = node.constant;
          break;
        case AcKind::Indicator:
          vals[i] = weights.w[node.var][cell * circuit.vars[node.var].arity +
                                        node.value];
          break;
        case AcKind::Sum: {
          double acc = 0.0;
          for (int kid : node.kids) acc += vals[kid];
          vals[i] = acc;
          break;
        }
        case AcKind::Product: {
          double acc = 1.0;
          for (int kid : node.kids) acc *= vals[kid];
          vals[i] = acc;
          break;
        }
      }
    }
    out[cell] = vals[circuit.root];
  }
  return out;
}

OpCount opcount(const WmcCircuit& circuit) {
  OpCount count;
  count.per_node.reserve(circuit.nodes.size());
  for (const auto& node : circuit.nodes) {
    count.per_node.push_back(node.ops);
    count.total += node.ops;
  }
  return count;
}

std::string dump_circuit(const WmcCircuit& circuit) {
  std::ostringstream out;
  out << "# circuit vars=" << circuit.vars.size()
      << " nodes=" << circuit.nodes.size() << " ops=" << circuit.total_ops
      << " worlds=" << lang::format_double(circuit.world_count) << "\n";
  for (const auto& var : circuit.vars) {
    out << "# var " << var.id << " token=" << var.token
        << " atom=" << var.atom.key() << " kind="
        << (var.domain == lang::Domain::Probability ? "bernoulli"
                                                    : "categorical")
        << " arity=" << var.arity;
    if (!var.cuts.empty()) {
      out << " cuts=[";
      for (size_t i = 0; i < var.cuts.size(); ++i) {
        if (i) out << ",";
        out << lang::format_double(var.cuts[i]);
      }
      out << "]";
    }
    out << "\n";
  }
  for (size_t i = 0; i < circuit.nodes.size(); ++i) {
    const AcNode& node = circuit.nodes[i];
    out << "node " << i << " ";
    switch (node.kind) {
      case AcKind::Constant:
        out << "const " << lang::format_double(node.constant);
        break;
      case AcKind::Indicator:
        out << "ind v" << node.var << "=" << node.value;
        break;
      case AcKind::Sum:
      case AcKind::Product:
        out << (node.kind == AcKind::Sum ? "add" : "mul") << " kids=[";
        for (size_t k = 0; k < node.kids.size(); ++k) {
          if (k) out << ",";
          out << node.kids[k];
        }
        out << "]";
        break;
    }
    out << " w=" << node.ops << "\n";
  }
  out << "root " << circuit.root << "\n";
  return out.str();
}

}  // namespace rml::compiler
