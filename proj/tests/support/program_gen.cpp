#include "support/program_gen.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace rml::testing {

lang::Program random_program(std::mt19937_64& rng, const GenOptions& opt) {
  lang::Program program;
  std::uniform_int_distribution<int> var_count(1, opt.max_vars);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int n_vars = var_count(rng);
  for (int i = 0; i < n_vars; ++i) {
    lang::ChannelDecl decl;
    decl.atom = lang::Atom{"s" + std::to_string(i), ""};
    decl.token = "/s" + std::to_string(i);
    decl.domain =
        unit(rng) < 0.5 ? lang::Domain::Probability : lang::Domain::Density;
    program.sources.push_back(decl);
  }

  // Thresholds per density channel, drawn up-front so comparisons reuse them.
  std::map<std::string, std::vector<double>> cuts;
  std::uniform_int_distribution<int> cut_count(1, opt.max_cuts);
  for (const auto& decl : program.sources) {
    if (decl.domain != lang::Domain::Density) continue;
    int n = cut_count(rng);
    std::vector<double> c;
    for (int i = 0; i < n; ++i)
      c.push_back(std::floor(unit(rng) * 400.0) / 2.0 + 1.0);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    cuts[decl.token] = c;
  }

  std::uniform_int_distribution<int> rule_count(1, opt.max_rules);
  std::uniform_int_distribution<int> body_count(1, opt.max_body);
  int n_rules = rule_count(rng);
  std::vector<lang::Atom> heads;
  for (int r = 0; r < n_rules; ++r) {
    // Heads d0..dk; a rule body may reference sources, comparisons, and
    // heads declared for EARLIER rules only, which keeps the program acyclic.
    std::uniform_int_distribution<int> head_pick(
        0, std::max(0, static_cast<int>(heads.size())));
    int h = head_pick(rng);
    lang::Atom head{"d" + std::to_string(h), ""};
    if (static_cast<size_t>(h) == heads.size()) heads.push_back(head);

    lang::Rule rule;
    rule.head = head;
    int n_body = body_count(rng);
    for (int b = 0; b < n_body; ++b) {
      double pick = unit(rng);
      if (pick < 0.4 || h == 0) {
        // source literal
        std::uniform_int_distribution<int> src(0, n_vars - 1);
        const auto& decl = program.sources[src(rng)];
        if (decl.domain == lang::Domain::Probability) {
          rule.body.push_back(decl.atom);
        } else {
          const auto& c = cuts[decl.token];
          std::uniform_int_distribution<int> cut_pick(
              0, static_cast<int>(c.size()) - 1);
          std::uniform_int_distribution<int> op_pick(0, 3);
          lang::CmpOp ops[4] = {lang::CmpOp::Lt, lang::CmpOp::Le,
                                lang::CmpOp::Gt, lang::CmpOp::Ge};
          rule.body.push_back(
              lang::Comparison{decl.atom, ops[op_pick(rng)], c[cut_pick(rng)]});
        }
      } else {
        std::uniform_int_distribution<int> prev(0, h - 1);
        rule.body.push_back(lang::Atom{"d" + std::to_string(prev(rng)), ""});
      }
    }
    program.rules.push_back(rule);
  }

  program.target = lang::Atom{"t", ""};
  program.target_token = "/t";
  lang::Rule target_rule;
  target_rule.head = program.target;
  // Target depends on the last head (or directly on a source when no rules).
  if (!heads.empty()) {
    target_rule.body.push_back(heads.back());
  } else {
    target_rule.body.push_back(program.sources.front().domain ==
                                       lang::Domain::Probability
                                   ? lang::BodyLiteral(program.sources[0].atom)
                                   : lang::BodyLiteral(lang::Comparison{
                                         program.sources[0].atom,
                                         lang::CmpOp::Lt,
                                         cuts[program.sources[0].token][0]}));
  }
  program.rules.push_back(target_rule);
  return program;
}

std::map<std::string, std::vector<double>> random_weights(
    const lang::Program& program, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto cuts = lang::collect_thresholds(program);
  std::map<std::string, std::vector<double>> weights;
  for (const auto& decl : program.sources) {
    if (decl.domain == lang::Domain::Probability) {
      double p = unit(rng);
      weights[decl.token] = {1.0 - p, p};
    } else {
      size_t n = cuts[decl.token].size() + 1;
      std::vector<double> v(n);
      double sum = 0.0;
      for (auto& x : v) {
        x = unit(rng) + 1e-6;
        sum += x;
      }
      for (auto& x : v) x /= sum;
      weights[decl.token] = v;
    }
  }
  return weights;
}

}  // namespace rml::testing
