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

#ifndef DFLOW_REWRITE_HPP_
#define DFLOW_REWRITE_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dflow/expr.hpp"

namespace dflow {

enum class Phase { Simplify, Expand };

const char* to_string(Phase phase);

// Named predicate over a bound subtree, from a `where ?x : name` line.
struct Guard {
  std::string var;
  std::string name;
};

struct RewriteRule {
  std::string name;
  Expr lhs;  // parsed with ParseOptions::patterns
  Expr rhs;
  int priority = 0;
  Phase phase = Phase::Simplify;
  std::vector<Guard> guards;
  std::size_t line = 0;  // line of the `rule` header
};

// Rules in firing order: higher priority first.
struct RuleSet {
  std::vector<RewriteRule> rules;

  bool empty() const { return rules.empty(); }
  std::size_t size() const { return rules.size(); }
  const RewriteRule* find(std::string_view name) const;
  // Rules of one phase, order kept.
  RuleSet only(Phase phase) const;
};

struct Binding {
  std::map<std::string, Expr> single;
  std::map<std::string, std::vector<Expr>> segments;

  friend bool operator==(const Binding&, const Binding&) = default;
};

class RuleSyntaxError : public std::runtime_error {
 public:
  RuleSyntaxError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnboundVariable : public std::runtime_error {
 public:
  explicit UnboundVariable(std::string name)
      : std::runtime_error("unbound pattern variable ?" + name), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DuplicateRuleName : public std::runtime_error {
 public:
  explicit DuplicateRuleName(const std::string& name)
      : std::runtime_error("duplicate rule name " + name) {}
};

class RewriteDivergence : public std::runtime_error {
 public:
  explicit RewriteDivergence(std::size_t cap)
      : std::runtime_error("rewriting did not reach a fixpoint within " + std::to_string(cap) +
                           " passes"),
        cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

struct RewriteOptions {
  std::size_t max_passes = 100;
  // Decides whether a call head has side effects; single-use let inlining
  // and the `pure` guard consult it. Unset means every call is pure.
  std::function<bool(std::string_view)> is_effectful;
};

struct RewriteStats {
  std::size_t passes = 0;
  std::map<std::string, std::size_t> firings;  // rule name -> count
};

// Rule DSL:
//
//   # comment
//   rule flatten_and priority 40 phase simplify
//     AND(?xs*, AND(?ys*), ?zs*)
//     => AND(?xs*, ?ys*, ?zs*)
//     where ?ys : call
//
// Either side may use S-expression or call syntax and span several lines.
// Throws RuleSyntaxError, UnboundVariable, DuplicateRuleName.
RuleSet parse_rules(std::string_view text);
// Throws std::runtime_error when the file cannot be read.
RuleSet load_rules(const std::string& path);

// Guards known to the engine.
bool known_guard(std::string_view name);
bool check_guard(std::string_view name, const Expr& e, const RewriteOptions& opts = {});

std::optional<Binding> match_pattern(const Expr& pattern, const Expr& e,
                                     const std::vector<Guard>& guards = {},
                                     const RewriteOptions& opts = {});

// Substitutes bound variables and runs @builtin calls. Throws UnboundVariable.
// With `mark_synthesized`, template nodes (not bound subtrees) are flagged.
Expr instantiate(const Expr& rhs, const Binding& b, const RewriteOptions& opts = {},
                 bool mark_synthesized = false);

// Bottom-up passes, highest-priority matching rule per node, one firing per
// node per pass, until a pass changes nothing. Throws RewriteDivergence.
Expr rewrite_fixpoint(const Expr& e, const RuleSet& rules, const RewriteOptions& opts = {},
                      RewriteStats* stats = nullptr);

// Let bindings used exactly once whose bound expression is pure are
// substituted; a let left without bindings becomes its body.
Expr inline_single_use(const Expr& let, const RewriteOptions& opts = {});
bool has_inlinable_binding(const Expr& let, const RewriteOptions& opts = {});
bool is_pure(const Expr& e, const RewriteOptions& opts = {});

// Constraint call with nothing in it: zero arguments and a head ending in
// "Constraint", or an empty AND.
bool is_empty_constraint(const Expr& e);

}  // namespace dflow

#endif  // DFLOW_REWRITE_HPP_
