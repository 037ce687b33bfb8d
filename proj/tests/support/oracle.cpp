#include "support/oracle.hpp"

#include <cassert>
#include <functional>
#include <stdexcept>

namespace rml::testing {

OracleModel make_oracle_model(const lang::Program& program) {
  OracleModel model;
  model.program = &program;
  model.cuts = lang::collect_thresholds(program);
  for (const auto& decl : program.sources) {
    model.tokens.push_back(decl.token);
    if (decl.domain == lang::Domain::Density) {
      model.arity.push_back(static_cast<int>(model.cuts[decl.token].size()) +
                            1);
    } else {
      model.arity.push_back(2);
    }
  }
  return model;
}

namespace {

bool eval_atom(const OracleModel& model,
               const std::map<std::string, int>& assignment,
               const lang::Atom& atom,
               std::map<std::string, int>& cache);  // -1 pending

bool eval_literal(const OracleModel& model,
                  const std::map<std::string, int>& assignment,
                  const lang::BodyLiteral& lit,
                  std::map<std::string, int>& cache) {
  if (const lang::Atom* atom = std::get_if<lang::Atom>(&lit)) {
    return eval_atom(model, assignment, *atom, cache);
  }
  const auto& cmp = std::get<lang::Comparison>(lit);
  const lang::ChannelDecl* decl =
      model.program->source_for_atom(cmp.channel);
  assert(decl && decl->domain == lang::Domain::Density);
  const auto& cuts = model.cuts.at(decl->token);
  int value = assignment.at(decl->token);
  // Interval `value` spans (cuts[value-1], cuts[value]). It satisfies `< c`
  // when it lies entirely below c, i.e. cuts[value] <= c.
  size_t k = cuts.size();
  for (size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] == cmp.threshold) {
      k = i;
      break;
    }
  }
  assert(k < cuts.size());
  bool below = (cmp.op == lang::CmpOp::Lt || cmp.op == lang::CmpOp::Le);
  return below ? static_cast<size_t>(value) <= k
               : static_cast<size_t>(value) > k;
}

bool eval_atom(const OracleModel& model,
               const std::map<std::string, int>& assignment,
               const lang::Atom& atom, std::map<std::string, int>& cache) {
  if (const lang::ChannelDecl* decl = model.program->source_for_atom(atom)) {
    if (decl->domain != lang::Domain::Probability)
      throw std::logic_error("density atom used without comparison");
    return assignment.at(decl->token) == 1;
  }
  std::string key = atom.key();
  if (auto it = cache.find(key); it != cache.end()) {
    if (it->second < 0) throw std::logic_error("cyclic program in oracle");
    return it->second != 0;
  }
  cache[key] = -1;
  bool result = false;
  for (const auto& rule : model.program->rules) {
    if (!(rule.head == atom)) continue;
    bool conj = true;
    for (const auto& lit : rule.body) {
      if (!eval_literal(model, assignment, lit, cache)) {
        conj = false;
        break;
      }
    }
    if (conj) {
      result = true;
      break;
    }
  }
  cache[key] = result ? 1 : 0;
  return result;
}

}  // namespace

bool oracle_truth(const OracleModel& model,
                  const std::map<std::string, int>& assignment,
                  const lang::Atom& query) {
  std::map<std::string, int> cache;
  return eval_atom(model, assignment, query, cache);
}

double oracle_wmc(const OracleModel& model,
                  const std::map<std::string, std::vector<double>>& weights,
                  const lang::Atom& query) {
  size_t n = model.tokens.size();
  std::vector<int> value(n, 0);
  double total = 0.0;
  for (;;) {
    std::map<std::string, int> assignment;
    double weight = 1.0;
    for (size_t i = 0; i < n; ++i) {
      assignment[model.tokens[i]] = value[i];
      weight *= weights.at(model.tokens[i])[value[i]];
    }
    if (oracle_truth(model, assignment, query)) total += weight;

    size_t i = 0;
    while (i < n) {
      if (++value[i] < model.arity[i]) break;
      value[i] = 0;
      ++i;
    }
    if (i == n) break;
    if (n == 0) break;
  }
  return total;
}

}  // namespace rml::testing
