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

// Rule language for mission programs (.resin files).
//
// A program declares typed signal channels, definite rules over them, and
// exactly one exported target atom:
//
//   over(park)        <- source("/over/park", Probability).
//   distance(primary) <- source("/distance/primary", Density).
//   permitted if over(park).
//   permitted if distance(primary) < 35.
//   permitted -> target("/landscape").
//
// Statements end with '.', comments run from '#' to end of line. Rule bodies
// are conjunctions joined by 'and'; several rules with the same head denote
// disjunction. Comparisons have the fixed shape `atom OP constant` with
// OP in {<, >, <=, >=} and only make sense on Density channels.

#ifndef RML_CORE_LANG_HPP
#define RML_CORE_LANG_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rml::lang {

enum class Domain { Probability, Density };

const char* domain_name(Domain d);

/// Ground atom: a bare identifier or identifier with one constant argument,
/// e.g. `landscape` or `over(park)`.
struct Atom {
  std::string name;
  std::string arg;  // empty when the atom has no argument

  std::string key() const { return arg.empty() ? name : name + "(" + arg + ")"; }
  bool operator==(const Atom& other) const = default;
  auto operator<=>(const Atom& other) const = default;
};

enum class CmpOp { Lt, Le, Gt, Ge };

const char* cmp_op_text(CmpOp op);

/// `d < 35` — the atom must name a Density channel; the constant is meters
/// for distance relations.
struct Comparison {
  Atom channel;
  CmpOp op;
  double threshold = 0.0;

  bool operator==(const Comparison& other) const = default;
};

using BodyLiteral = std::variant<Atom, Comparison>;

struct ChannelDecl {
  Atom atom;
  std::string token;
  Domain domain = Domain::Probability;

  bool operator==(const ChannelDecl& other) const = default;
};

struct Rule {
  Atom head;
  std::vector<BodyLiteral> body;  // non-empty conjunction
  int line = 0;                   // source line, for diagnostics

  bool operator==(const Rule& other) const {
    return head == other.head && body == other.body;
  }
};

struct Program {
  std::vector<ChannelDecl> sources;
  std::vector<Rule> rules;
  Atom target;
  std::string target_token;

  const ChannelDecl* source_for_atom(const Atom& atom) const;
  const ChannelDecl* source_for_token(std::string_view token) const;
  bool is_rule_head(const Atom& atom) const;

  bool operator==(const Program& other) const {
    return sources == other.sources && rules == other.rules &&
           target == other.target && target_token == other.target_token;
  }
};

/// Parses program text. Throws ParseError (Syntax, DuplicateChannel,
/// MultipleTargets, MissingTarget, UnknownAtom) on malformed input.
Program parse_program(std::string_view text);

/// Canonical printed form; parsing it yields a structurally equal Program.
std::string print_program(const Program& program);

struct ValidationIssue {
  enum class Kind {
    CyclicDefinition,
    TypeMismatch,
    UnreachableTarget,
    SourceHeadRule,
  };
  Kind kind;
  std::string message;
};

const char* validation_kind_name(ValidationIssue::Kind kind);

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Collects every invariant violation instead of stopping at the first.
ValidationReport validate(const Program& program);

/// Ascending, duplicate-free comparison constants per Density channel token.
/// Channels without comparisons map to an empty list.
std::map<std::string, std::vector<double>> collect_thresholds(
    const Program& program);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace rml::lang

#endif  // RML_CORE_LANG_HPP
