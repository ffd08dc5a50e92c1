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

#include "dflow/rewrite.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dflow {

const char* to_string(Phase phase) {
  return phase == Phase::Simplify ? "simplify" : "expand";
}

const RewriteRule* RuleSet::find(std::string_view name) const {
  for (const auto& r : rules)
    if (r.name == name) return &r;
  return nullptr;
}

RuleSet RuleSet::only(Phase phase) const {
  RuleSet out;
  for (const auto& r : rules)
    if (r.phase == phase) out.rules.push_back(r);
  return out;
}

// ---------------------------------------------------------------------------
// Guards and let helpers

bool is_empty_constraint(const Expr& e) {
  if (!e.is_call() || !e.args.empty() || !e.named.empty()) return false;
  if (e.name == "AND") return true;
  constexpr std::string_view suffix = "Constraint";
  return e.name.size() >= suffix.size() &&
         std::string_view(e.name).substr(e.name.size() - suffix.size()) == suffix;
}

bool is_pure(const Expr& e, const RewriteOptions& opts) {
  if (e.is_call() && opts.is_effectful && opts.is_effectful(e.name)) return false;
  for (const auto& a : e.args)
    if (!is_pure(a, opts)) return false;
  for (const auto& [k, v] : e.named)
    if (!is_pure(v, opts)) return false;
  return true;
}

namespace {

bool reserved_word(std::string_view s) { return s == "true" || s == "false" || s == "let"; }

// Free occurrences of `name`, honoring sequential let scoping.
std::size_t count_uses(const Expr& e, const std::string& name) {
  switch (e.kind) {
    case ExprKind::VarRef:
      return e.name == name ? 1 : 0;
    case ExprKind::Let: {
      std::size_t n = 0;
      for (const auto& [k, v] : e.named) {
        n += count_uses(v, name);
        if (k == name) return n;
      }
      return n + count_uses(e.let_body(), name);
    }
    default: {
      std::size_t n = 0;
      for (const auto& a : e.args) n += count_uses(a, name);
      for (const auto& [k, v] : e.named) n += count_uses(v, name);
      return n;
    }
  }
}

Expr substitute(const Expr& e, const std::string& name, const Expr& repl) {
  if (e.kind == ExprKind::VarRef) return e.name == name ? repl : e;
  Expr out = e;
  if (e.kind == ExprKind::Let) {
    for (auto& [k, v] : out.named) {
      v = substitute(v, name, repl);
      if (k == name) return out;
    }
    out.let_body() = substitute(e.let_body(), name, repl);
    return out;
  }
  for (auto& a : out.args) a = substitute(a, name, repl);
  for (auto& [k, v] : out.named) v = substitute(v, name, repl);
  return out;
}

void var_refs(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::VarRef) out.insert(e.name);
  for (const auto& a : e.args) var_refs(a, out);
  for (const auto& [k, v] : e.named) var_refs(v, out);
}

void let_names(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Let)
    for (const auto& [k, v] : e.named) out.insert(k);
  for (const auto& a : e.args) let_names(a, out);
  for (const auto& [k, v] : e.named) let_names(v, out);
}

// Index of the first binding that may be inlined, if any.
std::optional<std::size_t> inlinable_index(const Expr& let, const RewriteOptions& opts) {
  const auto& bs = let.named;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const auto& [name, value] = bs[i];
    std::size_t uses = 0;
    bool shadowed = false;
    std::set<std::string> binders;
    for (std::size_t j = i + 1; j < bs.size() && !shadowed; ++j) {
      uses += count_uses(bs[j].second, name);
      let_names(bs[j].second, binders);
      binders.insert(bs[j].first);
      if (bs[j].first == name) shadowed = true;
    }
    if (!shadowed) {
      uses += count_uses(let.let_body(), name);
      let_names(let.let_body(), binders);
    }
    if (uses != 1 || !is_pure(value, opts)) continue;
    std::set<std::string> free;
    var_refs(value, free);
    bool capture = std::any_of(free.begin(), free.end(),
                               [&](const std::string& v) { return binders.count(v) > 0; });
    if (!capture) return i;
  }
  return std::nullopt;
}

}  // namespace

bool has_inlinable_binding(const Expr& let, const RewriteOptions& opts) {
  return let.kind == ExprKind::Let && inlinable_index(let, opts).has_value();
}

Expr inline_single_use(const Expr& let, const RewriteOptions& opts) {
  if (let.kind != ExprKind::Let) return let;
  Expr cur = let;
  while (auto idx = inlinable_index(cur, opts)) {
    auto [name, value] = cur.named[*idx];
    Expr next = Expr::let({}, Expr());
    next.span = cur.span;
    bool shadowed = false;
    for (std::size_t j = 0; j < cur.named.size(); ++j) {
      if (j == *idx) continue;
      auto [k, v] = cur.named[j];
      if (j > *idx && !shadowed) v = substitute(v, name, value);
      if (j > *idx && k == name) shadowed = true;
      next.named.emplace_back(k, std::move(v));
    }
    next.let_body() =
        shadowed ? cur.let_body() : substitute(cur.let_body(), name, value);
    cur = std::move(next);
  }
  if (cur.named.empty()) return cur.let_body();
  return cur;
}

namespace {

constexpr std::string_view kGuards[] = {
    "text",    "symbol", "number",           "literal",       "call",
    "let",     "pure",   "empty_constraint", "inlinable_let", "identifier_text",
};

}  // namespace

bool known_guard(std::string_view name) {
  return std::find(std::begin(kGuards), std::end(kGuards), name) != std::end(kGuards);
}

bool check_guard(std::string_view name, const Expr& e, const RewriteOptions& opts) {
  if (name == "text") return e.kind == ExprKind::Text;
  if (name == "symbol") return e.kind == ExprKind::Symbol;
  if (name == "number") return e.kind == ExprKind::Number;
  if (name == "literal") return e.is_literal();
  if (name == "call") return e.is_call();
  if (name == "let") return e.kind == ExprKind::Let;
  if (name == "pure") return is_pure(e, opts);
  if (name == "empty_constraint") return is_empty_constraint(e);
  if (name == "inlinable_let") return has_inlinable_binding(e, opts);
  if (name == "identifier_text")
    return e.kind == ExprKind::Text && is_identifier(e.name) && !reserved_word(e.name);
  return false;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

using Cont = std::function<bool(Binding&)>;

bool match_node(const Expr& p, const Expr& e, Binding& b, const Cont& k);

bool match_list(const std::vector<Expr>& ps, std::size_t pi, const std::vector<Expr>& es,
                std::size_t ei, Binding& b, const Cont& k) {
  if (pi == ps.size()) return ei == es.size() && k(b);
  const Expr& p = ps[pi];
  if (p.kind == ExprKind::SegmentVar) {
    std::vector<Expr> bound;
    auto prior = b.segments.find(p.name);
    for (std::size_t len = es.size() - ei + 1; len-- > 0;) {
      std::vector<Expr> slice(es.begin() + static_cast<std::ptrdiff_t>(ei),
                              es.begin() + static_cast<std::ptrdiff_t>(ei + len));
      if (prior != b.segments.end() && prior->second != slice) continue;
      Binding trial = b;
      trial.segments[p.name] = std::move(slice);
      if (match_list(ps, pi + 1, es, ei + len, trial, k)) {
        b = std::move(trial);
        return true;
      }
    }
    return false;
  }
  if (ei == es.size()) return false;
  Binding trial = b;
  if (match_node(p, es[ei], trial,
                 [&](Binding& bb) { return match_list(ps, pi + 1, es, ei + 1, bb, k); })) {
    b = std::move(trial);
    return true;
  }
  return false;
}

bool match_named(const Expr::Named& ps, std::size_t i, const Expr& e, Binding& b,
                 const Cont& k) {
  if (i == ps.size()) return k(b);
  const Expr* value = e.find_named(ps[i].first);
  if (!value) return false;
  return match_node(ps[i].second, *value, b,
                    [&](Binding& bb) { return match_named(ps, i + 1, e, bb, k); });
}

bool same_keys(const Expr::Named& a, const Expr::Named& b) {
  if (a.size() != b.size()) return false;
  std::set<std::string> ka, kb;
  for (const auto& [k, v] : a) ka.insert(k);
  for (const auto& [k, v] : b) kb.insert(k);
  return ka == kb;
}

bool match_node(const Expr& p, const Expr& e, Binding& b, const Cont& k) {
  switch (p.kind) {
    case ExprKind::Wildcard:
      return k(b);
    case ExprKind::PatternVar: {
      auto it = b.single.find(p.name);
      if (it != b.single.end()) return it->second == e && k(b);
      b.single.emplace(p.name, e);
      return k(b);
    }
    case ExprKind::SegmentVar:
      return false;
    case ExprKind::Call:
      if (!e.is_call(p.name) || !same_keys(p.named, e.named)) return false;
      return match_named(p.named, 0, e, b, [&](Binding& bb) {
        return match_list(p.args, 0, e.args, 0, bb, k);
      });
    case ExprKind::Let: {
      if (e.kind != ExprKind::Let || e.named.size() != p.named.size()) return false;
      for (std::size_t i = 0; i < p.named.size(); ++i)
        if (p.named[i].first != e.named[i].first) return false;
      std::vector<Expr> ps, es;
      for (const auto& [n, v] : p.named) ps.push_back(v);
      for (const auto& [n, v] : e.named) es.push_back(v);
      ps.push_back(p.let_body());
      es.push_back(e.let_body());
      return match_list(ps, 0, es, 0, b, k);
    }
    default:
      return p == e && k(b);
  }
}

bool guards_hold(const std::vector<Guard>& guards, const Binding& b, const RewriteOptions& opts) {
  for (const auto& g : guards) {
    if (auto it = b.single.find(g.var); it != b.single.end()) {
      if (!check_guard(g.name, it->second, opts)) return false;
    } else if (auto seg = b.segments.find(g.var); seg != b.segments.end()) {
      for (const auto& x : seg->second)
        if (!check_guard(g.name, x, opts)) return false;
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<Binding> match_pattern(const Expr& pattern, const Expr& e,
                                     const std::vector<Guard>& guards,
                                     const RewriteOptions& opts) {
  Binding b;
  std::optional<Binding> out;
  match_node(pattern, e, b, [&](Binding& bb) {
    if (!guards_hold(guards, bb, opts)) return false;
    out = bb;
    return true;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Instantiation

namespace {

bool known_builtin(std::string_view name) {
  return name == "@symbol" || name == "@inline_single_use";
}

Expr run_builtin(const std::string& name, const Expr& arg, const RewriteOptions& opts) {
  if (name == "@symbol") {
    if (arg.kind == ExprKind::Text && is_identifier(arg.name) && !reserved_word(arg.name)) {
      Expr s = Expr::symbol(arg.name);
      s.span = arg.span;
      return s;
    }
    return arg;
  }
  return inline_single_use(arg, opts);
}

void instantiate_into(const Expr& t, const Binding& b, const RewriteOptions& opts, bool mark,
                      std::vector<Expr>& out);

Expr instantiate_one(const Expr& t, const Binding& b, const RewriteOptions& opts, bool mark) {
  switch (t.kind) {
    case ExprKind::PatternVar: {
      auto it = b.single.find(t.name);
      if (it == b.single.end()) throw UnboundVariable(t.name);
      return it->second;
    }
    case ExprKind::SegmentVar:
    case ExprKind::Wildcard:
      throw UnboundVariable(t.name.empty() ? "_" : t.name);
    default:
      break;
  }
  if (t.is_call() && !t.name.empty() && t.name[0] == '@') {
    if (!known_builtin(t.name) || t.args.size() != 1 || !t.named.empty())
      throw std::invalid_argument("bad builtin call " + t.name);
    return run_builtin(t.name, instantiate_one(t.args[0], b, opts, mark), opts);
  }
  Expr out = t;
  out.args.clear();
  for (const auto& a : t.args) instantiate_into(a, b, opts, mark, out.args);
  for (auto& [k, v] : out.named) v = instantiate_one(v, b, opts, mark);
  if (mark) out.synthesized = true;
  return out;
}

void instantiate_into(const Expr& t, const Binding& b, const RewriteOptions& opts, bool mark,
                      std::vector<Expr>& out) {
  if (t.kind == ExprKind::SegmentVar) {
    auto it = b.segments.find(t.name);
    if (it == b.segments.end()) throw UnboundVariable(t.name);
    out.insert(out.end(), it->second.begin(), it->second.end());
    return;
  }
  out.push_back(instantiate_one(t, b, opts, mark));
}

}  // namespace

Expr instantiate(const Expr& rhs, const Binding& b, const RewriteOptions& opts,
                 bool mark_synthesized) {
  return instantiate_one(rhs, b, opts, mark_synthesized);
}

// ---------------------------------------------------------------------------
// Fixpoint

namespace {

class Rewriter {
 public:
  Rewriter(const RuleSet& rules, const RewriteOptions& opts, RewriteStats* stats)
      : rules_(rules), opts_(opts), stats_(stats) {}

  Expr pass(const Expr& e, bool& changed) {
    Expr cur = e;
    for (auto& a : cur.args) a = pass(a, changed);
    for (auto& [k, v] : cur.named) v = pass(v, changed);
    for (const auto& rule : rules_.rules) {
      auto b = match_pattern(rule.lhs, cur, rule.guards, opts_);
      if (!b) continue;
      bool mark = rule.phase == Phase::Expand;
      Expr next = instantiate(rule.rhs, *b, opts_, mark);
      if (next == cur) continue;
      if (mark && next.is_call(cur.name)) next.synthesized = cur.synthesized;
      next.span = cur.span;
      changed = true;
      if (stats_) ++stats_->firings[rule.name];
      return next;
    }
    return cur;
  }

 private:
  const RuleSet& rules_;
  const RewriteOptions& opts_;
  RewriteStats* stats_;
};

}  // namespace

Expr rewrite_fixpoint(const Expr& e, const RuleSet& rules, const RewriteOptions& opts,
                      RewriteStats* stats) {
  Rewriter rw(rules, opts, stats);
  Expr cur = e;
  for (std::size_t i = 0; i < opts.max_passes; ++i) {
    bool changed = false;
    cur = rw.pass(cur, changed);
    if (stats) stats->passes = i + 1;
    if (!changed) return cur;
  }
  throw RewriteDivergence(opts.max_passes);
}

// ---------------------------------------------------------------------------
// Rule DSL

namespace {

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t find_arrow(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '=' && s[i + 1] == '>') {
      return i;
    }
  }
  return std::string::npos;
}

struct Stanza {
  std::size_t header_line = 0;
  std::string header;
  // Body lines (comments stripped) with their 1-based line numbers.
  std::vector<std::pair<std::size_t, std::string>> lines;
};

std::vector<Stanza> split_stanzas(std::string_view text) {
  std::vector<Stanza> out;
  std::istringstream in{std::string(text)};
  std::string raw_line;
  std::size_t lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    std::string line = strip_comment(raw_line);
    std::string t = trim(line);
    if (t.rfind("rule", 0) == 0 && (t.size() == 4 || t[4] == ' ' || t[4] == '\t')) {
      out.push_back({lineno, t, {}});
      continue;
    }
    if (t.empty()) continue;
    if (out.empty()) throw RuleSyntaxError(lineno, "expected 'rule NAME ...' header");
    out.back().lines.emplace_back(lineno, line);
  }
  return out;
}

void collect_vars(const Expr& e, std::map<std::string, ExprKind>& vars, std::size_t line,
                  bool in_args_position, bool is_lhs) {
  switch (e.kind) {
    case ExprKind::PatternVar:
    case ExprKind::SegmentVar: {
      if (e.kind == ExprKind::SegmentVar && !in_args_position)
        throw RuleSyntaxError(line, "segment variable ?" + e.name +
                                        "* may only appear among positional arguments");
      auto [it, fresh] = vars.emplace(e.name, e.kind);
      if (!fresh && is_lhs)
        throw RuleSyntaxError(line, "variable ?" + e.name + " appears more than once");
      if (!fresh && it->second != e.kind)
        throw RuleSyntaxError(line, "variable ?" + e.name + " used both as segment and single");
      return;
    }
    case ExprKind::Wildcard:
      if (!is_lhs) throw RuleSyntaxError(line, "?_ cannot appear on the right-hand side");
      return;
    case ExprKind::Call:
      if (!e.name.empty() && e.name[0] == '@') {
        if (is_lhs) throw RuleSyntaxError(line, "builtin " + e.name + " in a pattern");
        if (!known_builtin(e.name)) throw RuleSyntaxError(line, "unknown builtin " + e.name);
        if (e.args.size() != 1 || !e.named.empty())
          throw RuleSyntaxError(line, e.name + " takes exactly one argument");
      }
      for (const auto& a : e.args) collect_vars(a, vars, line, true, is_lhs);
      for (const auto& [k, v] : e.named) collect_vars(v, vars, line, false, is_lhs);
      return;
    case ExprKind::Let:
      for (const auto& [k, v] : e.named) collect_vars(v, vars, line, false, is_lhs);
      collect_vars(e.let_body(), vars, line, false, is_lhs);
      return;
    default:
      return;
  }
}

Expr parse_side(const std::string& text, std::size_t first_line, const char* what) {
  if (trim(text).empty()) throw RuleSyntaxError(first_line, std::string("missing ") + what);
  try {
    return parse_any(text, ParseOptions{true});
  } catch (const SyntaxError& e) {
    std::size_t line = first_line;
    for (std::size_t i = 0; i + 1 < e.position() && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw RuleSyntaxError(line, std::string(what) + ": " + e.what());
  }
}

RewriteRule parse_stanza(const Stanza& s) {
  RewriteRule rule;
  rule.line = s.header_line;
  std::istringstream hs(s.header);
  std::string word;
  hs >> word;  // "rule"
  if (!(hs >> rule.name) || !is_identifier(rule.name))
    throw RuleSyntaxError(s.header_line, "rule header needs an identifier name");
  while (hs >> word) {
    std::string value;
    if (!(hs >> value)) throw RuleSyntaxError(s.header_line, "'" + word + "' needs a value");
    if (word == "priority") {
      try {
        std::size_t used = 0;
        rule.priority = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw RuleSyntaxError(s.header_line, "priority must be an integer, got " + value);
      }
    } else if (word == "phase") {
      if (value == "simplify") rule.phase = Phase::Simplify;
      else if (value == "expand") rule.phase = Phase::Expand;
      else throw RuleSyntaxError(s.header_line, "phase must be simplify or expand");
    } else {
      throw RuleSyntaxError(s.header_line, "unknown rule attribute '" + word + "'");
    }
  }

  // Sides: everything before the first "=>" is the pattern, the rest up to
  // the where-lines is the template.
  std::string lhs_text, rhs_text;
  std::size_t lhs_line = 0, rhs_line = 0;
  bool seen_arrow = false, seen_where = false;
  for (const auto& [lineno, line] : s.lines) {
    std::string t = trim(line);
    if (t.rfind("where", 0) == 0 && (t.size() == 5 || t[5] == ' ' || t[5] == '\t')) {
      seen_where = true;
      std::string rest = trim(std::string_view(t).substr(5));
      auto colon = rest.find(':');
      if (colon == std::string::npos || rest.empty() || rest[0] != '?')
        throw RuleSyntaxError(lineno, "expected 'where ?var : guard'");
      std::string var = trim(std::string_view(rest).substr(1, colon - 1));
      if (!is_identifier(var) && var != "_")
        throw RuleSyntaxError(lineno, "bad guard variable ?" + var);
      std::istringstream gs(rest.substr(colon + 1));
      std::string g;
      bool any = false;
      while (std::getline(gs, g, ',')) {
        g = trim(g);
        if (!known_guard(g)) throw RuleSyntaxError(lineno, "unknown guard '" + g + "'");
        rule.guards.push_back({var, g});
        any = true;
      }
      if (!any) throw RuleSyntaxError(lineno, "guard list is empty");
      continue;
    }
    if (seen_where) throw RuleSyntaxError(lineno, "only where-lines may follow the guards");
    if (!seen_arrow) {
      auto arrow = find_arrow(line);
      if (arrow == std::string::npos) {
        if (lhs_text.empty()) lhs_line = lineno;
        lhs_text += line + "\n";
        continue;
      }
      if (lhs_text.empty()) lhs_line = lineno;
      lhs_text += line.substr(0, arrow) + "\n";
      seen_arrow = true;
      rhs_line = lineno;
      rhs_text = line.substr(arrow + 2) + "\n";
      continue;
    }
    rhs_text += line + "\n";
  }
  if (!seen_arrow) throw RuleSyntaxError(s.header_line, "rule " + rule.name + " has no '=>'");
  rule.lhs = parse_side(lhs_text, lhs_line, "pattern");
  rule.rhs = parse_side(rhs_text, rhs_line, "template");

  std::map<std::string, ExprKind> lhs_vars, rhs_vars;
  collect_vars(rule.lhs, lhs_vars, lhs_line, false, true);
  collect_vars(rule.rhs, rhs_vars, rhs_line, false, false);
  for (const auto& [name, kind] : rhs_vars) {
    auto it = lhs_vars.find(name);
    if (it == lhs_vars.end()) throw UnboundVariable(name);
    if (it->second != kind)
      throw RuleSyntaxError(rhs_line, "variable ?" + name + " used both as segment and single");
  }
  for (const auto& g : rule.guards)
    if (!lhs_vars.count(g.var)) throw UnboundVariable(g.var);
  return rule;
}

}  // namespace

RuleSet parse_rules(std::string_view text) {
  RuleSet set;
  std::map<std::pair<Phase, int>, std::string> priorities;
  for (const auto& stanza : split_stanzas(text)) {
    RewriteRule rule = parse_stanza(stanza);
    if (set.find(rule.name)) throw DuplicateRuleName(rule.name);
    auto [it, fresh] = priorities.emplace(std::pair(rule.phase, rule.priority), rule.name);
    if (!fresh)
      throw RuleSyntaxError(rule.line, "priority " + std::to_string(rule.priority) +
                                           " already used by rule " + it->second);
    set.rules.push_back(std::move(rule));
  }
  std::stable_sort(set.rules.begin(), set.rules.end(),
                   [](const RewriteRule& a, const RewriteRule& b) { return a.priority > b.priority; });
  return set;
}

RuleSet load_rules(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read rule file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

}  // namespace dflow
