// Brute-force weighted model count over all joint assignments. Test oracle:
// evaluates rule semantics directly from the AST and never touches the
// decision-diagram or circuit code paths it is used to check.

#ifndef RML_TESTS_SUPPORT_ORACLE_HPP
#define RML_TESTS_SUPPORT_ORACLE_HPP

#include <map>
#include <string>
#include <vector>

#include "core/lang.hpp"

namespace rml::testing {

struct OracleModel {
  const lang::Program* program;
  // Channel tokens in a fixed order with their interval counts (Bernoulli
  // channels have 2 "values": false, true).
  std::vector<std::string> tokens;
  std::vector<int> arity;
  std::map<std::string, std::vector<double>> cuts;  // per Density token
};

OracleModel make_oracle_model(const lang::Program& program);

/// Sum over satisfying total assignments of the product of value weights.
/// `weights[token]` has one probability per value index.
double oracle_wmc(const OracleModel& model,
                  const std::map<std::string, std::vector<double>>& weights,
                  const lang::Atom& query);

/// Truth of `query` under one total assignment (value index per token).
bool oracle_truth(const OracleModel& model,
                  const std::map<std::string, int>& assignment,
                  const lang::Atom& query);

}  // namespace rml::testing

#endif  // RML_TESTS_SUPPORT_ORACLE_HPP
