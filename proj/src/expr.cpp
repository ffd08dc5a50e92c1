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

#include "dflow/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace dflow {

const char* to_string(ExprKind kind) {
  switch (kind) {
    case ExprKind::Call: return "Call";
    case ExprKind::Symbol: return "Symbol";
    case ExprKind::Text: return "Text";
    case ExprKind::Number: return "Number";
    case ExprKind::Bool: return "Bool";
    case ExprKind::Let: return "Let";
    case ExprKind::VarRef: return "VarRef";
    case ExprKind::PatternVar: return "PatternVar";
    case ExprKind::SegmentVar: return "SegmentVar";
    case ExprKind::Wildcard: return "Wildcard";
  }
  return "?";
}

Expr Expr::call(std::string head, std::vector<Expr> args, Named named) {
  Expr e;
  e.kind = ExprKind::Call;
  e.name = std::move(head);
  e.args = std::move(args);
  e.named = std::move(named);
  return e;
}

Expr Expr::symbol(std::string name) {
  Expr e;
  e.kind = ExprKind::Symbol;
  e.name = std::move(name);
  return e;
}

Expr Expr::text(std::string value) {
  Expr e;
  e.kind = ExprKind::Text;
  e.name = std::move(value);
  return e;
}

Expr Expr::number(std::string lexeme) {
  Expr e;
  e.kind = ExprKind::Number;
  e.name = std::move(lexeme);
  return e;
}

Expr Expr::integer(long long value) { return number(std::to_string(value)); }

Expr Expr::boolean(bool value) {
  Expr e;
  e.kind = ExprKind::Bool;
  e.flag = value;
  return e;
}

Expr Expr::let(Named bindings, Expr body) {
  Expr e;
  e.kind = ExprKind::Let;
  e.named = std::move(bindings);
  e.args.push_back(std::move(body));
  return e;
}

Expr Expr::var(std::string name) {
  Expr e;
  e.kind = ExprKind::VarRef;
  e.name = std::move(name);
  return e;
}

const Expr* Expr::find_named(std::string_view key) const {
  for (const auto& [k, v] : named)
    if (k == key) return &v;
  return nullptr;
}

bool Expr::is_integer() const {
  return kind == ExprKind::Number && name.find('.') == std::string::npos;
}

long long Expr::as_integer() const {
  long long out = 0;
  std::from_chars(name.data(), name.data() + name.size(), out);
  return out;
}

double Expr::as_double() const { return std::strtod(name.c_str(), nullptr); }

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name) return false;
  if (a.kind == ExprKind::Bool && a.flag != b.flag) return false;
  if (a.args.size() != b.args.size() || a.named.size() != b.named.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (a.args[i] != b.args[i]) return false;
  for (std::size_t i = 0; i < a.named.size(); ++i) {
    if (a.named[i].first != b.named[i].first) return false;
    if (a.named[i].second != b.named[i].second) return false;
  }
  return true;
}

namespace {

std::string describe_position(std::size_t position, const std::string& expected) {
  return "syntax error at position " + std::to_string(position) + ": expected " +
         expected;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position, std::string expected)
    : std::runtime_error(describe_position(position, expected)),
      position_(position),
      expected_(std::move(expected)) {}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!std::isalpha(head) && head != '_') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '.';
  });
}

std::string quote_text(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (const auto& a : e.args) n += node_count(a);
  for (const auto& [k, v] : e.named) n += node_count(v);
  return n;
}

namespace {

constexpr int kMaxDepth = 400;

enum class Tok {
  LParen,
  RParen,
  Comma,
  Equals,
  Keyword,  // :name (S-expression named-argument marker)
  Ident,
  Builtin,  // @name (patterns only)
  String,
  Number,
  PatVar,
  SegVar,
  Wild,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
};

class Lexer {
 public:
  Lexer(std::string_view input, bool patterns) : in_(input), patterns_(patterns) {}

  const Token& peek() {
    if (!peeked_) {
      next_ = scan();
      peeked_ = true;
    }
    return next_;
  }

  Token take() {
    peek();
    peeked_ = false;
    return std::move(next_);
  }

  std::size_t size() const { return in_.size(); }

 private:
  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }

  std::size_t scan_ident(std::size_t p) const {
    while (p < in_.size() && ident_char(in_[p])) ++p;
    return p;
  }

  Token scan() {
    while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_])))
      ++pos_;
    Token t;
    t.start = pos_;
    if (pos_ >= in_.size()) {
      t.kind = Tok::End;
      t.end = pos_;
      return t;
    }
    char c = in_[pos_];
    auto single = [&](Tok k) {
      t.kind = k;
      t.text = std::string(1, c);
      t.end = ++pos_;
      return t;
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      case '=': return single(Tok::Equals);
      default: break;
    }
    if (c == '"') return scan_string();
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < in_.size() &&
         std::isdigit(static_cast<unsigned char>(in_[pos_ + 1])))) {
      return scan_number();
    }
    if (ident_start(c)) {
      std::size_t end = scan_ident(pos_);
      t.kind = Tok::Ident;
      t.text = std::string(in_.substr(pos_, end - pos_));
      t.end = pos_ = end;
      return t;
    }
    if (c == ':' && pos_ + 1 < in_.size() && ident_start(in_[pos_ + 1])) {
      std::size_t end = scan_ident(pos_ + 1);
      t.kind = Tok::Keyword;
      t.text = std::string(in_.substr(pos_ + 1, end - pos_ - 1));
      t.end = pos_ = end;
      return t;
    }
    if (patterns_ && c == '@' && pos_ + 1 < in_.size() && ident_start(in_[pos_ + 1])) {
      std::size_t end = scan_ident(pos_ + 1);
      t.kind = Tok::Builtin;
      t.text = std::string(in_.substr(pos_, end - pos_));
      t.end = pos_ = end;
      return t;
    }
    if (patterns_ && c == '?' && pos_ + 1 < in_.size() && ident_start(in_[pos_ + 1])) {
      std::size_t end = scan_ident(pos_ + 1);
      std::string name(in_.substr(pos_ + 1, end - pos_ - 1));
      if (name == "_") {
        t.kind = Tok::Wild;
      } else if (end < in_.size() && in_[end] == '*') {
        t.kind = Tok::SegVar;
        ++end;
      } else {
        t.kind = Tok::PatVar;
      }
      t.text = std::move(name);
      t.end = pos_ = end;
      return t;
    }
    throw SyntaxError(pos_ + 1, "a token, found '" + std::string(1, c) + "'");
  }

  Token scan_string() {
    Token t;
    t.kind = Tok::String;
    t.start = pos_;
    ++pos_;
    while (true) {
      if (pos_ >= in_.size()) throw SyntaxError(pos_ + 1, "closing '\"'");
      char c = in_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        t.text += c;
        continue;
      }
      if (pos_ >= in_.size()) throw SyntaxError(pos_ + 1, "escape character");
      char e = in_[pos_++];
      switch (e) {
        case 'n': t.text += '\n'; break;
        case 't': t.text += '\t'; break;
        case '"': t.text += '"'; break;
        case '\\': t.text += '\\'; break;
        default: throw SyntaxError(pos_, "a valid escape (\\n \\t \\\" \\\\)");
      }
    }
    t.end = pos_;
    return t;
  }

  Token scan_number() {
    Token t;
    t.kind = Tok::Number;
    t.start = pos_;
    std::size_t p = pos_;
    if (in_[p] == '-') ++p;
    while (p < in_.size() && std::isdigit(static_cast<unsigned char>(in_[p]))) ++p;
    if (p + 1 < in_.size() && in_[p] == '.' &&
        std::isdigit(static_cast<unsigned char>(in_[p + 1]))) {
      ++p;
      while (p < in_.size() && std::isdigit(static_cast<unsigned char>(in_[p]))) ++p;
    }
    if (p < in_.size() && ident_char(in_[p]))
      throw SyntaxError(p + 1, "a delimiter after number");
    t.text = std::string(in_.substr(pos_, p - pos_));
    t.end = pos_ = p;
    return t;
  }

  std::string_view in_;
  bool patterns_;
  std::size_t pos_ = 0;
  Token next_;
  bool peeked_ = false;
};

// Shared scope tracking: identifiers bound by an enclosing let read as VarRef.
class ScopeStack {
 public:
  bool bound(const std::string& name) const {
    return std::find(names_.rbegin(), names_.rend(), name) != names_.rend();
  }
  void push(std::string name) { names_.push_back(std::move(name)); }
  void pop(std::size_t n) { names_.resize(names_.size() - n); }

 private:
  std::vector<std::string> names_;
};

bool reserved(const std::string& s) {
  return s == "true" || s == "false" || s == "let";
}

class ParserBase {
 public:
  ParserBase(std::string_view input, const ParseOptions& options)
      : lex_(input, options.patterns), options_(options) {}

 protected:

  [[noreturn]] void fail(const Token& at, const std::string& expected) {
    throw SyntaxError(at.start + 1, expected);
  }

  Token expect(Tok kind, const char* what) {
    if (lex_.peek().kind != kind) fail(lex_.peek(), what);
    return lex_.take();
  }

  void enter() {
    if (++depth_ > kMaxDepth) fail(lex_.peek(), "shallower nesting");
  }
  void leave() { --depth_; }

  // Leaf forms that are spelled identically in both surface syntaxes.
  std::optional<Expr> leaf(const Token& t) {
    Expr e;
    switch (t.kind) {
      case Tok::String: e = Expr::text(t.text); break;
      case Tok::Number: e = Expr::number(t.text); break;
      case Tok::PatVar: e.kind = ExprKind::PatternVar; e.name = t.text; break;
      case Tok::SegVar: e.kind = ExprKind::SegmentVar; e.name = t.text; break;
      case Tok::Wild: e.kind = ExprKind::Wildcard; e.name = "_"; break;
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          e = Expr::boolean(t.text == "true");
        } else if (t.text == "let") {
          return std::nullopt;
        } else if (scope_.bound(t.text)) {
          e = Expr::var(t.text);
        } else {
          e = Expr::symbol(t.text);
        }
        break;
      default:
        return std::nullopt;
    }
    e.span = {t.start, t.end};
    return e;
  }

  void finish() {
    if (lex_.peek().kind != Tok::End) fail(lex_.peek(), "end of input");
  }

  static void add_named(Expr& call, std::string key, Expr value, const Token& at) {
    for (const auto& [k, v] : call.named)
      if (k == key) throw SyntaxError(at.start + 1, "a unique name, '" + key + "' repeats");
    call.named.emplace_back(std::move(key), std::move(value));
  }

  Lexer lex_;
  ParseOptions options_;
  ScopeStack scope_;
  int depth_ = 0;
};

class SexpParser : ParserBase {
 public:
  using ParserBase::ParserBase;

  Expr parse_all() {
    Expr e = parse();
    finish();
    return e;
  }

 private:
  Expr parse() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::LParen) return parse_list();
    Token tok = lex_.take();
    if (auto e = leaf(tok)) return *std::move(e);
    fail(tok, tok.kind == Tok::End ? "an expression" : "an expression, found '" + tok.text + "'");
  }

  Expr parse_list() {
    enter();
    Token open = lex_.take();
    const Token& head = lex_.peek();
    if (head.kind == Tok::RParen) fail(head, "a function name (empty call)");
    if (head.kind != Tok::Ident && head.kind != Tok::Builtin) fail(head, "a function name");
    Token name = lex_.take();
    Expr e;
    if (name.kind == Tok::Ident && name.text == "let") {
      e = parse_let_rest();
    } else {
      if (name.kind == Tok::Ident && reserved(name.text)) fail(name, "a function name");
      e = Expr::call(name.text);
      while (true) {
        const Token& t = lex_.peek();
        if (t.kind == Tok::RParen) break;
        if (t.kind == Tok::End) fail(t, "')'");
        if (t.kind == Tok::Keyword) {
          Token key = lex_.take();
          if (lex_.peek().kind == Tok::RParen || lex_.peek().kind == Tok::End)
            fail(lex_.peek(), "a value for :" + key.text);
          Expr value = parse();
          add_named(e, key.text, std::move(value), key);
        } else {
          e.args.push_back(parse());
        }
      }
    }
    Token close = expect(Tok::RParen, "')'");
    e.span = {open.start, close.end};
    leave();
    return e;
  }

  // After "(let": "(" name expr ... ")" body
  Expr parse_let_rest() {
    expect(Tok::LParen, "'(' opening let bindings");
    Expr::Named bindings;
    std::size_t pushed = 0;
    while (lex_.peek().kind != Tok::RParen) {
      const Token& t = lex_.peek();
      if (t.kind != Tok::Ident || reserved(t.text)) fail(t, "a binding name or ')'");
      Token name = lex_.take();
      for (const auto& [k, v] : bindings)
        if (k == name.text) fail(name, "a unique binding name, '" + name.text + "' repeats");
      if (lex_.peek().kind == Tok::RParen || lex_.peek().kind == Tok::End)
        fail(lex_.peek(), "a bound expression");
      Expr value = parse();
      bindings.emplace_back(name.text, std::move(value));
      scope_.push(name.text);
      ++pushed;
    }
    lex_.take();
    if (lex_.peek().kind == Tok::RParen || lex_.peek().kind == Tok::End)
      fail(lex_.peek(), "a let body");
    Expr body = parse();
    scope_.pop(pushed);
    return Expr::let(std::move(bindings), std::move(body));
  }
};

class PexpParser : ParserBase {
 public:
  using ParserBase::ParserBase;

  Expr parse_all() {
    Expr e = parse();
    finish();
    return e;
  }

 private:
  Expr parse() {
    Token t = lex_.take();
    if ((t.kind == Tok::Ident || t.kind == Tok::Builtin) &&
        lex_.peek().kind == Tok::LParen) {
      if (t.text == "let") return parse_let(t);
      if (reserved(t.text)) fail(t, "a function name");
      return parse_call(t);
    }
    if (auto e = leaf(t)) return *std::move(e);
    if (t.kind == Tok::Ident && t.text == "let") fail(lex_.peek(), "'(' after let");
    fail(t, t.kind == Tok::End ? "an expression" : "an expression, found '" + t.text + "'");
  }

  // Reads "(" items ")" where an item is either expr or name=expr. Positional
  // items must precede named ones unless `trailing_positional` (let bodies).
  template <typename OnPositional, typename OnNamed>
  std::size_t parse_items(OnPositional on_positional, OnNamed on_named,
                          bool trailing_positional = false) {
    enter();
    expect(Tok::LParen, "'('");
    bool seen_named = false;
    if (lex_.peek().kind != Tok::RParen) {
      while (true) {
        const Token& t = lex_.peek();
        if (t.kind == Tok::End) fail(t, "an argument or ')'");
        bool is_named = false;
        if (t.kind == Tok::Ident) {
          Token name = lex_.take();
          if (lex_.peek().kind == Tok::Equals) {
            lex_.take();
            is_named = true;
            seen_named = true;
            on_named(name);
          } else {
            push_back_ident(std::move(name));
          }
        }
        if (!is_named) {
          if (seen_named && !trailing_positional)
            fail(lex_.peek(), "a named argument (positional after named)");
          on_positional();
        }
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
    }
    Token close = expect(Tok::RParen, "',' or ')'");
    leave();
    return close.end;
  }

  // One-token pushback for the identifier consumed while looking for '='.
  void push_back_ident(Token name) { pending_ = std::move(name); }

  Expr parse_arg() {
    if (!pending_) return parse();
    Token t = std::move(*pending_);
    pending_.reset();
    if (lex_.peek().kind == Tok::LParen) {
      if (t.text == "let") return parse_let(t);
      if (reserved(t.text)) fail(t, "a function name");
      return parse_call(t);
    }
    if (auto e = leaf(t)) return *std::move(e);
    fail(t, "an expression");
  }

  Expr parse_call(const Token& head) {
    Expr e = Expr::call(head.text);
    std::size_t end = parse_items(
        [&] { e.args.push_back(parse_arg()); },
        [&](const Token& name) { add_named(e, name.text, parse_arg(), name); });
    e.span = {head.start, end};
    return e;
  }

  // let(x1=expr, x2=expr, body)
  Expr parse_let(const Token& head) {
    Expr::Named bindings;
    std::vector<Expr> body;
    std::size_t pushed = 0;
    std::size_t end = parse_items(
        [&] {
          if (!body.empty()) fail(lex_.peek(), "')' after let body");
          body.push_back(parse_arg());
        },
        [&](const Token& name) {
          if (!body.empty()) fail(name, "')' after let body");
          if (reserved(name.text)) fail(name, "a binding name");
          for (const auto& [k, v] : bindings)
            if (k == name.text) fail(name, "a unique binding name, '" + name.text + "' repeats");
          Expr value = parse_arg();
          bindings.emplace_back(name.text, std::move(value));
          scope_.push(name.text);
          ++pushed;
        },
        true);
    scope_.pop(pushed);
    if (body.empty()) throw SyntaxError(end, "a let body");
    Expr e = Expr::let(std::move(bindings), std::move(body.front()));
    e.span = {head.start, end};
    return e;
  }

  std::optional<Token> pending_;
};

void print_p(const Expr& e, std::string& out);
void print_s(const Expr& e, std::string& out);

void print_leaf(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Text: out += quote_text(e.name); break;
    case ExprKind::Bool: out += e.flag ? "true" : "false"; break;
    case ExprKind::PatternVar: out += '?'; out += e.name; break;
    case ExprKind::SegmentVar: out += '?'; out += e.name; out += '*'; break;
    case ExprKind::Wildcard: out += "?_"; break;
    default: out += e.name; break;
  }
}

void print_p(const Expr& e, std::string& out) {
  if (e.kind != ExprKind::Call && e.kind != ExprKind::Let) {
    print_leaf(e, out);
    return;
  }
  out += e.kind == ExprKind::Let ? "let" : e.name;
  out += '(';
  bool first = true;
  auto sep = [&] {
    if (!first) out += ", ";
    first = false;
  };
  if (e.kind == ExprKind::Let) {
    for (const auto& [k, v] : e.named) {
      sep();
      out += k;
      out += '=';
      print_p(v, out);
    }
    sep();
    print_p(e.let_body(), out);
  } else {
    for (const auto& a : e.args) {
      sep();
      print_p(a, out);
    }
    for (const auto& [k, v] : e.named) {
      sep();
      out += k;
      out += '=';
      print_p(v, out);
    }
  }
  out += ')';
}

void print_s(const Expr& e, std::string& out) {
  if (e.kind == ExprKind::Let) {
    out += "(let (";
    bool first = true;
    for (const auto& [k, v] : e.named) {
      if (!first) out += ' ';
      first = false;
      out += k;
      out += ' ';
      print_s(v, out);
    }
    out += ") ";
    print_s(e.let_body(), out);
    out += ')';
    return;
  }
  if (e.kind != ExprKind::Call) {
    print_leaf(e, out);
    return;
  }
  out += '(';
  out += e.name;
  for (const auto& a : e.args) {
    out += ' ';
    print_s(a, out);
  }
  for (const auto& [k, v] : e.named) {
    out += " :";
    out += k;
    out += ' ';
    print_s(v, out);
  }
  out += ')';
}

void tokens_of(const Expr& e, std::vector<std::string>& out) {
  if (e.kind != ExprKind::Call && e.kind != ExprKind::Let) {
    std::string leaf;
    print_leaf(e, leaf);
    out.push_back(std::move(leaf));
    return;
  }
  out.push_back(e.kind == ExprKind::Let ? "let" : e.name);
  out.emplace_back("(");
  if (e.kind == ExprKind::Let) {
    for (const auto& [k, v] : e.named) {
      out.push_back(k);
      out.emplace_back("=");
      tokens_of(v, out);
    }
    tokens_of(e.let_body(), out);
  } else {
    for (const auto& a : e.args) tokens_of(a, out);
    for (const auto& [k, v] : e.named) {
      out.push_back(k);
      out.emplace_back("=");
      tokens_of(v, out);
    }
  }
  out.emplace_back(")");
}

}  // namespace

Expr parse_sexp(std::string_view input, const ParseOptions& options) {
  return SexpParser(input, options).parse_all();
}

Expr parse_pexp(std::string_view input, const ParseOptions& options) {
  return PexpParser(input, options).parse_all();
}

Expr parse_any(std::string_view input, const ParseOptions& options) {
  auto first = input.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && input[first] == '(')
    return parse_sexp(input, options);
  return parse_pexp(input, options);
}

std::string print_pexp(const Expr& e) {
  std::string out;
  print_p(e, out);
  return out;
}

std::string print_sexp(const Expr& e) {
  std::string out;
  print_s(e, out);
  return out;
}

std::vector<std::string> tokenize_linear(const Expr& e) {
  std::vector<std::string> out;
  tokens_of(e, out);
  return out;
}

}  // namespace dflow
