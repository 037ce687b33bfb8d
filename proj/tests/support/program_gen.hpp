// Random definite programs and weight assignments for property tests.

#ifndef RML_TESTS_SUPPORT_PROGRAM_GEN_HPP
#define RML_TESTS_SUPPORT_PROGRAM_GEN_HPP

#include <map>
#include <random>
#include <string>
#include <vector>

#include "core/lang.hpp"

namespace rml::testing {

struct GenOptions {
  int max_vars = 6;
  int max_cuts = 3;      // per Density channel
  int max_rules = 8;
  int max_body = 3;
};

/// A valid definite program: random channels, random acyclic rules, one
/// reachable target.
lang::Program random_program(std::mt19937_64& rng, const GenOptions& opt = {});

/// Normalized random weights per channel token (Bernoulli: {1-p, p};
/// categorical: a random point on the simplex).
std::map<std::string, std::vector<double>> random_weights(
    const lang::Program& program, std::mt19937_64& rng);

}  // namespace rml::testing

#endif  // RML_TESTS_SUPPORT_PROGRAM_GEN_HPP
