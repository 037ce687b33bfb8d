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

#include "core/lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "core/error.hpp"

namespace rml::lang {

const char* domain_name(Domain d) {
  return d == Domain::Probability ? "Probability" : "Density";
}

const char* cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

const ChannelDecl* Program::source_for_atom(const Atom& atom) const {
  for (const auto& decl : sources)
    if (decl.atom == atom) return &decl;
  return nullptr;
}

const ChannelDecl* Program::source_for_token(std::string_view token) const {
  for (const auto& decl : sources)
    if (decl.token == token) return &decl;
  return nullptr;
}

bool Program::is_rule_head(const Atom& atom) const {
  for (const auto& rule : rules)
    if (rule.head == atom) return true;
  return false;
}

namespace {

enum class TokKind {
  Ident,
  Number,
  String,
  ArrowLeft,   // <-
  ArrowRight,  // ->
  Lt,
  Le,
  Gt,
  Ge,
  LParen,
  RParen,
  Comma,
  Dot,
  End,
};

struct Token {
  TokKind kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token tok = current_;
    advance();
    return tok;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    throw ParseError(ErrorCode::Syntax, line_, column_, msg);
  }

  char at(size_t offset = 0) const {
    return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0';
  }

  void bump() {
    if (pos_ >= text_.size()) return;
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    for (;;) {
      char c = at();
      if (c == '#') {
        while (at() != '\n' && at() != '\0') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        return;
      }
    }
  }

  void advance() {
    skip_space_and_comments();
    current_.line = line_;
    current_.column = column_;
    char c = at();
    if (c == '\0') {
      current_.kind = TokKind::End;
      current_.text.clear();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident;
      while (std::isalnum(static_cast<unsigned char>(at())) || at() == '_') {
        ident.push_back(at());
        bump();
      }
      current_.kind = TokKind::Ident;
      current_.text = std::move(ident);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(at(1))))) {
      std::string num;
      if (at() == '-') {
        num.push_back('-');
        bump();
      }
      while (std::isdigit(static_cast<unsigned char>(at()))) {
        num.push_back(at());
        bump();
      }
      // A '.' only belongs to the number when a digit follows; otherwise it
      // terminates the statement ("... < 35.").
      if (at() == '.' && std::isdigit(static_cast<unsigned char>(at(1)))) {
        num.push_back('.');
        bump();
        while (std::isdigit(static_cast<unsigned char>(at()))) {
          num.push_back(at());
          bump();
        }
      }
      if ((at() == 'e' || at() == 'E') &&
          (std::isdigit(static_cast<unsigned char>(at(1))) ||
           ((at(1) == '+' || at(1) == '-') &&
            std::isdigit(static_cast<unsigned char>(at(2)))))) {
        num.push_back(at());
        bump();
        if (at() == '+' || at() == '-') {
          num.push_back(at());
          bump();
        }
        while (std::isdigit(static_cast<unsigned char>(at()))) {
          num.push_back(at());
          bump();
        }
      }
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(num.data(), num.data() + num.size(), value);
      if (ec != std::errc() || ptr != num.data() + num.size() ||
          !std::isfinite(value)) {
        error("invalid numeric constant '" + num + "'");
      }
      current_.kind = TokKind::Number;
      current_.text = std::move(num);
      current_.number = value;
      return;
    }
    if (c == '"') {
      bump();
      std::string str;
      while (at() != '"') {
        if (at() == '\0' || at() == '\n') error("unterminated string literal");
        str.push_back(at());
        bump();
      }
      bump();
      current_.kind = TokKind::String;
      current_.text = std::move(str);
      return;
    }
    switch (c) {
      case '<':
        bump();
        if (at() == '-') {
          bump();
          current_.kind = TokKind::ArrowLeft;
        } else if (at() == '=') {
          bump();
          current_.kind = TokKind::Le;
        } else {
          current_.kind = TokKind::Lt;
        }
        return;
      case '>':
        bump();
        if (at() == '=') {
          bump();
          current_.kind = TokKind::Ge;
        } else {
          current_.kind = TokKind::Gt;
        }
        return;
      case '-':
        bump();
        if (at() == '>') {
          bump();
          current_.kind = TokKind::ArrowRight;
          return;
        }
        error("stray '-'");
      case '(':
        bump();
        current_.kind = TokKind::LParen;
        return;
      case ')':
        bump();
        current_.kind = TokKind::RParen;
        return;
      case ',':
        bump();
        current_.kind = TokKind::Comma;
        return;
      case '.':
        bump();
        current_.kind = TokKind::Dot;
        return;
      default:
        error(std::string("unexpected character '") + c + "'");
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  Token current_;
};

bool is_keyword(const std::string& ident) {
  return ident == "if" || ident == "and" || ident == "source" ||
         ident == "target" || ident == "Probability" || ident == "Density";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) {}

  Program parse() {
    Program program;
    bool have_target = false;
    while (lexer_.peek().kind != TokKind::End) {
      parse_statement(program, have_target);
    }
    if (!have_target) {
      throw ParseError(ErrorCode::MissingTarget, lexer_.peek().line,
                       lexer_.peek().column,
                       "program declares no target channel");
    }
    resolve_atoms(program);
    return program;
  }

 private:
  [[noreturn]] void error_at(const Token& tok, ErrorCode code,
                             const std::string& msg) {
    throw ParseError(code, tok.line, tok.column, msg);
  }

  Token expect(TokKind kind, const char* what) {
    Token tok = lexer_.take();
    if (tok.kind != kind) {
      error_at(tok, ErrorCode::Syntax,
               std::string("expected ") + what + ", got '" + tok.text + "'");
    }
    return tok;
  }

  Atom parse_atom() {
    Token name = expect(TokKind::Ident, "atom name");
    if (is_keyword(name.text)) {
      error_at(name, ErrorCode::Syntax,
               "keyword '" + name.text + "' cannot be used as an atom");
    }
    Atom atom{name.text, ""};
    if (lexer_.peek().kind == TokKind::LParen) {
      lexer_.take();
      Token arg = expect(TokKind::Ident, "atom argument");
      if (is_keyword(arg.text)) {
        error_at(arg, ErrorCode::Syntax,
                 "keyword '" + arg.text + "' cannot be used as an argument");
      }
      atom.arg = arg.text;
      expect(TokKind::RParen, "')'");
    }
    return atom;
  }

  void parse_statement(Program& program, bool& have_target) {
    Token head_tok = lexer_.peek();
    Atom atom = parse_atom();
    Token next = lexer_.take();
    switch (next.kind) {
      case TokKind::ArrowLeft: {
        // atom <- source("token", Domain).
        Token kw = expect(TokKind::Ident, "'source'");
        if (kw.text != "source")
          error_at(kw, ErrorCode::Syntax, "expected 'source'");
        expect(TokKind::LParen, "'('");
        Token token = expect(TokKind::String, "channel token string");
        expect(TokKind::Comma, "','");
        Token domain_tok = expect(TokKind::Ident, "channel domain");
        Domain domain;
        if (domain_tok.text == "Probability") {
          domain = Domain::Probability;
        } else if (domain_tok.text == "Density") {
          domain = Domain::Density;
        } else {
          error_at(domain_tok, ErrorCode::Syntax,
                   "unknown domain '" + domain_tok.text +
                       "' (expected Probability or Density)");
        }
        expect(TokKind::RParen, "')'");
        expect(TokKind::Dot, "'.'");
        for (const auto& decl : program.sources) {
          if (decl.token == token.text) {
            error_at(token, ErrorCode::DuplicateChannel,
                     "channel token \"" + token.text + "\" declared twice");
          }
          if (decl.atom == atom) {
            error_at(head_tok, ErrorCode::DuplicateChannel,
                     "atom " + atom.key() + " bound to more than one channel");
          }
        }
        program.sources.push_back(ChannelDecl{atom, token.text, domain});
        return;
      }
      case TokKind::ArrowRight: {
        // atom -> target("token").
        Token kw = expect(TokKind::Ident, "'target'");
        if (kw.text != "target")
          error_at(kw, ErrorCode::Syntax, "expected 'target'");
        expect(TokKind::LParen, "'('");
        Token token = expect(TokKind::String, "target token string");
        expect(TokKind::RParen, "')'");
        expect(TokKind::Dot, "'.'");
        if (have_target) {
          error_at(head_tok, ErrorCode::MultipleTargets,
                   "program declares more than one target");
        }
        have_target = true;
        program.target = atom;
        program.target_token = token.text;
        return;
      }
      case TokKind::Ident: {
        // atom if lit and lit ... .
        if (next.text != "if") {
          error_at(next, ErrorCode::Syntax,
                   "expected 'if', '<-' or '->' after atom");
        }
        Rule rule;
        rule.head = atom;
        rule.line = head_tok.line;
        for (;;) {
          rule.body.push_back(parse_body_literal());
          Token sep = lexer_.take();
          if (sep.kind == TokKind::Dot) break;
          if (!(sep.kind == TokKind::Ident && sep.text == "and")) {
            error_at(sep, ErrorCode::Syntax, "expected 'and' or '.'");
          }
        }
        program.rules.push_back(std::move(rule));
        return;
      }
      default:
        error_at(next, ErrorCode::Syntax,
                 "expected 'if', '<-' or '->' after atom");
    }
  }

  BodyLiteral parse_body_literal() {
    Atom atom = parse_atom();
    TokKind k = lexer_.peek().kind;
    if (k == TokKind::Lt || k == TokKind::Le || k == TokKind::Gt ||
        k == TokKind::Ge) {
      Token op_tok = lexer_.take();
      Token num = expect(TokKind::Number, "numeric constant");
      CmpOp op = op_tok.kind == TokKind::Lt   ? CmpOp::Lt
                 : op_tok.kind == TokKind::Le ? CmpOp::Le
                 : op_tok.kind == TokKind::Gt ? CmpOp::Gt
                                              : CmpOp::Ge;
      return Comparison{atom, op, num.number};
    }
    return atom;
  }

  // Every body atom must be a declared source or the head of some rule.
  void resolve_atoms(const Program& program) {
    std::set<Atom> known;
    for (const auto& decl : program.sources) known.insert(decl.atom);
    for (const auto& rule : program.rules) known.insert(rule.head);
    for (const auto& rule : program.rules) {
      for (const auto& lit : rule.body) {
        const Atom* atom = nullptr;
        if (const Atom* a = std::get_if<Atom>(&lit)) {
          atom = a;
        } else {
          atom = &std::get<Comparison>(lit).channel;
        }
        if (!known.count(*atom)) {
          throw ParseError(ErrorCode::UnknownAtom, rule.line, 1,
                           "atom " + atom->key() +
                               " has no source declaration and no rule");
        }
      }
    }
  }

  Lexer lexer_;
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).parse(); }

std::string format_double(double value) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == value) return buf;
  }
  return buf;
}

std::string print_program(const Program& program) {
  std::ostringstream out;
  for (const auto& decl : program.sources) {
    out << decl.atom.key() << " <- source(\"" << decl.token << "\", "
        << domain_name(decl.domain) << ").\n";
  }
  for (const auto& rule : program.rules) {
    out << rule.head.key() << " if ";
    for (size_t i = 0; i < rule.body.size(); ++i) {
      if (i > 0) out << " and ";
      if (const Atom* atom = std::get_if<Atom>(&rule.body[i])) {
        out << atom->key();
      } else {
        const auto& cmp = std::get<Comparison>(rule.body[i]);
        out << cmp.channel.key() << " " << cmp_op_text(cmp.op) << " "
            << format_double(cmp.threshold);
      }
    }
    out << ".\n";
  }
  out << program.target.key() << " -> target(\"" << program.target_token
      << "\").\n";
  return out.str();
}

const char* validation_kind_name(ValidationIssue::Kind kind) {
  switch (kind) {
    case ValidationIssue::Kind::CyclicDefinition: return "CyclicDefinition";
    case ValidationIssue::Kind::TypeMismatch: return "TypeMismatch";
    case ValidationIssue::Kind::UnreachableTarget: return "UnreachableTarget";
    case ValidationIssue::Kind::SourceHeadRule: return "SourceHeadRule";
  }
  return "?";
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& issue : issues) {
    out << validation_kind_name(issue.kind) << ": " << issue.message << "\n";
  }
  return out.str();
}

ValidationReport validate(const Program& program) {
  ValidationReport report;
  auto add = [&](ValidationIssue::Kind kind, std::string msg) {
    report.issues.push_back(ValidationIssue{kind, std::move(msg)});
  };

  // Channel atoms are exclusively extensional; a source atom may not also be
  // derived by rules.
  for (const auto& rule : program.rules) {
    if (program.source_for_atom(rule.head)) {
      add(ValidationIssue::Kind::SourceHeadRule,
          "rule head " + rule.head.key() + " is a source channel atom");
    }
  }

  for (const auto& rule : program.rules) {
    for (const auto& lit : rule.body) {
      if (const Atom* atom = std::get_if<Atom>(&lit)) {
        const ChannelDecl* decl = program.source_for_atom(*atom);
        if (decl && decl->domain == Domain::Density) {
          add(ValidationIssue::Kind::TypeMismatch,
              "Density channel atom " + atom->key() +
                  " used without a comparison in rule for " + rule.head.key());
        }
      } else {
        const auto& cmp = std::get<Comparison>(lit);
        const ChannelDecl* decl = program.source_for_atom(cmp.channel);
        if (!decl) {
          add(ValidationIssue::Kind::TypeMismatch,
              "comparison on " + cmp.channel.key() +
                  " which is not a source channel");
        } else if (decl->domain != Domain::Density) {
          add(ValidationIssue::Kind::TypeMismatch,
              "comparison on Probability channel " + cmp.channel.key());
        }
      }
    }
  }

  // Cycle detection over derived heads.
  std::map<Atom, std::vector<Atom>> edges;
  for (const auto& rule : program.rules) {
    auto& outs = edges[rule.head];
    for (const auto& lit : rule.body) {
      if (const Atom* atom = std::get_if<Atom>(&lit)) {
        if (!program.source_for_atom(*atom) && program.is_rule_head(*atom)) {
          outs.push_back(*atom);
        }
      }
    }
  }
  std::map<Atom, int> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<Atom> cyclic;
  auto dfs = [&](auto&& self, const Atom& atom) -> bool {
    int& s = state[atom];
    if (s == 1) return true;
    if (s == 2) return false;
    s = 1;
    bool found = false;
    for (const auto& next : edges[atom]) {
      if (self(self, next)) {
        found = true;
        if (std::find(cyclic.begin(), cyclic.end(), atom) == cyclic.end())
          cyclic.push_back(atom);
      }
    }
    s = 2;
    return found;
  };
  for (const auto& [head, _] : edges) {
    if (state[head] == 0) dfs(dfs, head);
  }
  for (const auto& atom : cyclic) {
    add(ValidationIssue::Kind::CyclicDefinition,
        "derived atom " + atom.key() + " depends on itself");
  }

  if (!program.source_for_atom(program.target) &&
      !program.is_rule_head(program.target)) {
    add(ValidationIssue::Kind::UnreachableTarget,
        "target atom " + program.target.key() +
            " is neither a source nor defined by any rule");
  }

  return report;
}

std::map<std::string, std::vector<double>> collect_thresholds(
    const Program& program) {
  std::map<std::string, std::vector<double>> result;
  for (const auto& decl : program.sources) {
    if (decl.domain == Domain::Density) result[decl.token] = {};
  }
  for (const auto& rule : program.rules) {
    for (const auto& lit : rule.body) {
      const auto* cmp = std::get_if<Comparison>(&lit);
      if (!cmp) continue;
      const ChannelDecl* decl = program.source_for_atom(cmp->channel);
      if (!decl || decl->domain != Domain::Density) continue;
      result[decl->token].push_back(cmp->threshold);
    }
  }
  for (auto& [token, cuts] : result) {
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  }
  return result;
}

}  // namespace rml::lang

namespace rml {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "Syntax";
    case ErrorCode::DuplicateChannel: return "DuplicateChannel";
    case ErrorCode::MultipleTargets: return "MultipleTargets";
    case ErrorCode::MissingTarget: return "MissingTarget";
    case ErrorCode::UnknownAtom: return "UnknownAtom";
    case ErrorCode::InvalidProgram: return "InvalidProgram";
    case ErrorCode::VariableBudgetExceeded: return "VariableBudgetExceeded";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::UninitializedSource: return "UninitializedSource";
    case ErrorCode::AllRatesZero: return "AllRatesZero";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::EmptyFeatureClass: return "EmptyFeatureClass";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "?";
}

}  // namespace rml
