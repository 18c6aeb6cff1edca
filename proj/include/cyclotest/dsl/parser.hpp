// Copyright 2026 The Cyclotest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cyclotest/dsl/ast.hpp"

namespace cyclotest::dsl {

class ParseError : public Error {
 public:
  ParseError(SourceLoc loc, std::string message, std::vector<std::string> expected = {})
      : Error(render(loc, message, expected)),
        loc_(loc),
        message_(std::move(message)),
        expected_(std::move(expected)) {}

  int line() const { return loc_.line; }
  int column() const { return loc_.column; }
  const std::string& message() const { return message_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string render(SourceLoc loc, const std::string& message,
                            const std::vector<std::string>& expected) {
    std::string out = std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message;
    if (!expected.empty()) {
      out += " (expected";
      for (std::size_t i = 0; i < expected.size(); ++i) out += (i ? ", " : " ") + expected[i];
      out += ")";
    }
    return out;
  }

  SourceLoc loc_;
  std::string message_;
  std::vector<std::string> expected_;
};

namespace detail {

enum class Tok { Ident, Int, Duration, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  Value number = 0;
  SourceLoc loc;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto is_ident_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), 0, loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string digits(src.substr(i, j - i));
      Value number = 0;
      try {
        number = std::stoll(digits);
      } catch (const std::out_of_range&) {
        throw ParseError(loc, "integer literal out of range");
      }
      // "60s" is a duration; "60 s" or "60sec" are not.
      if (j < src.size() && src[j] == 's' && (j + 1 >= src.size() || !is_ident_char(src[j + 1]))) {
        out.push_back({Tok::Duration, digits + "s", number, loc});
        advance(j + 1 - i);
      } else {
        out.push_back({Tok::Int, digits, number, loc});
        advance(j - i);
      }
      continue;
    }
    static const char* two_char[] = {"&&", "||", "==", "!=", "<=", ">=", ".."};
    bool matched = false;
    for (const char* op : two_char) {
      if (src.substr(i, 2) == op) {
        out.push_back({Tok::Punct, op, 0, loc});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("{}();:=!<>+-,").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), 0, loc});
      advance(1);
      continue;
    }
    throw ParseError(loc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "<end of input>", 0, {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  ModelAst parse_model() {
    ModelAst ast;
    expect_keyword("model");
    ast.name = expect_ident("model name");
    expect("{");
    while (peek_keyword("input") || peek_keyword("output") || peek_keyword("state")) {
      parse_decl(ast);
    }
    if (!peek_keyword("logic")) {
      fail({"input", "output", "state", "logic"});
    }
    next();
    ast_ = &ast;
    ast.body = parse_block(NodeId());
    expect("}");
    if (peek().kind != Tok::End) fail({"<end of input>"});

    for (const auto& out : ast.outputs) {
      if (!assigned_.count(out.name)) {
        throw ParseError(out.loc, "output never assigned: '" + out.name + "'");
      }
    }
    return ast;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool peek_punct(std::string_view p) const {
    return peek().kind == Tok::Punct && peek().text == p;
  }
  bool peek_keyword(std::string_view k) const {
    return peek().kind == Tok::Ident && peek().text == k;
  }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw ParseError(peek().loc, "unexpected '" + peek().text + "'", std::move(expected));
  }
  void expect(std::string_view p) {
    if (!peek_punct(p)) fail({"'" + std::string(p) + "'"});
    next();
  }
  void expect_keyword(std::string_view k) {
    if (!peek_keyword(k)) fail({"'" + std::string(k) + "'"});
    next();
  }
  std::string expect_ident(const std::string& what) {
    if (peek().kind != Tok::Ident || is_reserved(peek().text)) fail({what});
    return next().text;
  }
  static bool is_reserved(const std::string& s) {
    static const std::set<std::string> words = {"model", "input", "output", "state", "logic",
                                                "if",    "else",  "held",   "true",  "false",
                                                "bool",  "int",   "hidden", "readable"};
    return words.count(s) > 0;
  }

  Value parse_signed_int() {
    bool negative = false;
    if (peek_punct("-")) {
      next();
      negative = true;
    }
    if (peek().kind != Tok::Int) fail({"integer"});
    Value v = next().number;
    return negative ? -v : v;
  }

  Type parse_type() {
    if (peek_keyword("bool")) {
      next();
      return Type::boolean();
    }
    if (peek_keyword("int")) {
      SourceLoc loc = next().loc;
      Value lo = parse_signed_int();
      expect("..");
      Value hi = parse_signed_int();
      if (lo > hi) throw ParseError(loc, "empty integer range");
      return Type::int_range(lo, hi);
    }
    fail({"'bool'", "'int'"});
  }

  void parse_decl(ModelAst& ast) {
    std::string role = next().text;
    VarDecl decl;
    decl.loc = peek().loc;
    decl.name = expect_ident("identifier");
    if (lookup(ast, decl.name)) {
      throw ParseError(decl.loc, "duplicate declaration of '" + decl.name + "'");
    }
    expect(":");
    decl.type = parse_type();
    if (role == "state") {
      decl.initial = decl.type.lo;
      if (peek_punct("=")) {
        SourceLoc loc = next().loc;
        decl.initial = parse_signed_int();
        if (!decl.type.contains(decl.initial)) {
          throw ParseError(loc, "initial value outside the declared range");
        }
      }
      if (peek_keyword("hidden")) {
        next();
        decl.visibility = Visibility::Hidden;
      } else if (peek_keyword("readable")) {
        next();
      }
    }
    expect(";");
    auto& list = role == "input" ? ast.inputs : role == "output" ? ast.outputs : ast.state_vars;
    list.push_back(std::move(decl));
  }

  Node parse_block(const NodeId& id) {
    Node node;
    node.id = id;
    node.loc = peek().loc;
    expect("{");
    if (peek_keyword("if")) {
      node = parse_if(id);
      expect("}");
      return node;
    }
    while (!peek_punct("}")) node.assignments.push_back(parse_assignment());
    next();
    return node;
  }

  Node parse_if(const NodeId& id) {
    Node node;
    node.id = id;
    node.loc = peek().loc;
    expect_keyword("if");
    expect("(");
    in_condition_ = true;
    node.condition = parse_expr();
    in_condition_ = false;
    expect(")");
    node.children.push_back(parse_block(id.then_child()));
    expect_keyword("else");
    if (peek_keyword("if")) {
      node.children.push_back(parse_if(id.else_child()));
    } else {
      node.children.push_back(parse_block(id.else_child()));
    }
    return node;
  }

  Assignment parse_assignment() {
    Assignment a;
    a.loc = peek().loc;
    if (peek().kind != Tok::Ident) fail({"assignment", "'if'", "'}'"});
    a.target = expect_ident("assignment target");
    auto target = lookup(*ast_, a.target);
    if (!target) throw ParseError(a.loc, "undeclared identifier '" + a.target + "'");
    if (target->first == VarRole::Input) {
      throw ParseError(a.loc, "cannot assign to input '" + a.target + "'");
    }
    expect("=");
    a.value = parse_expr();
    expect(";");
    assigned_.insert(a.target);
    return a;
  }

  Expr parse_expr() { return parse_or(); }

  Expr parse_or() {
    SourceLoc loc = peek().loc;
    std::vector<Expr> ops{parse_and()};
    while (peek_punct("||")) {
      next();
      ops.push_back(parse_and());
    }
    Expr e = Expr::nary(ExprKind::Or, std::move(ops));
    e.loc = loc;
    return e;
  }

  Expr parse_and() {
    SourceLoc loc = peek().loc;
    std::vector<Expr> ops{parse_cmp()};
    while (peek_punct("&&")) {
      next();
      ops.push_back(parse_cmp());
    }
    Expr e = Expr::nary(ExprKind::And, std::move(ops));
    e.loc = loc;
    return e;
  }

  Expr parse_cmp() {
    SourceLoc loc = peek().loc;
    Expr lhs = parse_add();
    static const std::pair<const char*, ExprKind> ops[] = {
        {"==", ExprKind::Eq}, {"!=", ExprKind::Ne}, {"<", ExprKind::Lt},
        {"<=", ExprKind::Le}, {">", ExprKind::Gt},  {">=", ExprKind::Ge}};
    for (const auto& [text, kind] : ops) {
      if (peek_punct(text)) {
        next();
        Expr e = Expr::binary(kind, std::move(lhs), parse_add());
        e.loc = loc;
        return e;
      }
    }
    return lhs;
  }

  Expr parse_add() {
    SourceLoc loc = peek().loc;
    Expr lhs = parse_unary();
    while (peek_punct("+") || peek_punct("-")) {
      ExprKind kind = next().text == "+" ? ExprKind::Add : ExprKind::Sub;
      lhs = Expr::binary(kind, std::move(lhs), parse_unary());
      lhs.loc = loc;
    }
    return lhs;
  }

  Expr parse_unary() {
    SourceLoc loc = peek().loc;
    if (peek_punct("!")) {
      next();
      Expr e = Expr::unary(ExprKind::Not, parse_unary());
      e.loc = loc;
      return e;
    }
    if (peek_punct("-")) {
      next();
      Expr operand = parse_unary();
      if (operand.kind == ExprKind::IntLit) {
        operand.value = -operand.value;
        operand.loc = loc;
        return operand;
      }
      Expr e = Expr::unary(ExprKind::Neg, std::move(operand));
      e.loc = loc;
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& t = peek();
    SourceLoc loc = t.loc;
    if (t.kind == Tok::Int) {
      Expr e = Expr::integer(next().number);
      e.loc = loc;
      return e;
    }
    if (peek_punct("(")) {
      next();
      Expr e = parse_expr();
      expect(")");
      return e;
    }
    if (peek_keyword("true") || peek_keyword("false")) {
      Expr e = Expr::boolean(next().text == "true");
      e.loc = loc;
      return e;
    }
    if (peek_keyword("held")) {
      next();
      if (!in_condition_) throw ParseError(loc, "held() is only allowed in if conditions");
      if (in_held_) throw ParseError(loc, "held() cannot be nested");
      expect("(");
      in_held_ = true;
      Expr formula = parse_expr();
      in_held_ = false;
      expect(",");
      if (peek().kind != Tok::Duration) fail({"duration such as 60s"});
      Value seconds = next().number;
      if (seconds < 1) throw ParseError(loc, "held() duration must be at least 1s");
      expect(")");
      Expr e = Expr::held(std::move(formula), seconds * 1000);
      e.loc = loc;
      return e;
    }
    if (t.kind == Tok::Ident && !is_reserved(t.text)) {
      std::string name = next().text;
      auto decl = lookup(*ast_, name);
      if (!decl) throw ParseError(loc, "undeclared identifier '" + name + "'");
      if (decl->first == VarRole::Output) {
        throw ParseError(loc, "output '" + name + "' cannot be read");
      }
      Expr e = Expr::var(name);
      e.loc = loc;
      return e;
    }
    fail({"expression"});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ModelAst* ast_ = nullptr;
  std::set<std::string> assigned_;
  bool in_condition_ = false;
  bool in_held_ = false;
};

}  // namespace detail

inline ModelAst parse_model(std::string_view source) {
  return detail::Parser(source).parse_model();
}

}  // namespace cyclotest::dsl
