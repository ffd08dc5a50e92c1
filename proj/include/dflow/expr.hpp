// Copyright 2026 The dflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DFLOW_EXPR_HPP_
#define DFLOW_EXPR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dflow {

// Character offsets into the parsed text, 0-based, end exclusive.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

enum class ExprKind {
  Call,
  Symbol,
  Text,
  Number,
  Bool,
  Let,
  VarRef,
  // Pattern-only forms, accepted by the parsers when ParseOptions::patterns
  // is set.
  PatternVar,  // ?x
  SegmentVar,  // ?xs*
  Wildcard,    // ?_
};

const char* to_string(ExprKind kind);

// Expression tree shared by both annotation surface forms.
//
// Field use by kind:
//   Call     name = head, args = positional, named = named arguments
//   Let      named = bindings in order, args[0] = body
//   Symbol, VarRef, PatternVar, SegmentVar   name = identifier
//   Text     name = decoded string value
//   Number   name = numeric lexeme
//   Bool     flag
struct Expr {
  using Named = std::vector<std::pair<std::string, Expr>>;

  ExprKind kind = ExprKind::Symbol;
  std::string name;
  bool flag = false;
  std::vector<Expr> args;
  Named named;
  SourceSpan span;
  // Set on nodes inserted by the expansion phase. Not part of equality.
  bool synthesized = false;

  static Expr call(std::string head, std::vector<Expr> args = {},
                   Named named = {});
  static Expr symbol(std::string name);
  static Expr text(std::string value);
  static Expr number(std::string lexeme);
  static Expr integer(long long value);
  static Expr boolean(bool value);
  static Expr let(Named bindings, Expr body);
  static Expr var(std::string name);

  bool is_call() const { return kind == ExprKind::Call; }
  bool is_call(std::string_view head) const {
    return kind == ExprKind::Call && name == head;
  }
  bool is_literal() const {
    return kind == ExprKind::Text || kind == ExprKind::Number ||
           kind == ExprKind::Bool || kind == ExprKind::Symbol;
  }
  const Expr& let_body() const { return args.front(); }
  Expr& let_body() { return args.front(); }
  const Expr* find_named(std::string_view key) const;

  // Number helpers; valid only for kind == Number.
  bool is_integer() const;
  long long as_integer() const;
  double as_double() const;
};

// Structural equality: ignores spans and the synthesized flag. Named
// arguments compare in order.
bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

class SyntaxError : public std::runtime_error {
 public:
  // position is 1-based (the first character of the input is position 1).
  SyntaxError(std::size_t position, std::string expected);

  std::size_t position() const { return position_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

struct ParseOptions {
  // Accept ?x, ?xs*, ?_ and @builtin heads (rule files).
  bool patterns = false;
};

Expr parse_sexp(std::string_view input, const ParseOptions& options = {});
Expr parse_pexp(std::string_view input, const ParseOptions& options = {});

// Parses either form: input whose first non-blank character is '(' is read as
// an S-expression, anything else as a call expression.
Expr parse_any(std::string_view input, const ParseOptions& options = {});

std::string print_pexp(const Expr& e);
std::string print_sexp(const Expr& e);

// Structural token sequence used as the program length measure. The same tree
// yields the same tokens whichever surface form it came from.
std::vector<std::string> tokenize_linear(const Expr& e);

bool is_identifier(std::string_view s);
std::string quote_text(std::string_view value);

// Number of nodes in the tree (every kind counts as one).
std::size_t node_count(const Expr& e);

}  // namespace dflow

#endif  // DFLOW_EXPR_HPP_
