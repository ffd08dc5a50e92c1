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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <functional>

#include "doctest.h"
#include "support.hpp"

using namespace dflow;
namespace t = dflow::testing;

namespace {

Expr pat(std::string_view text) { return parse_any(text, ParseOptions{true}); }

bool contains_head(const Expr& e, std::string_view head) {
  if (e.is_call(head)) return true;
  for (const auto& a : e.args)
    if (contains_head(a, head)) return true;
  for (const auto& [k, v] : e.named)
    if (contains_head(v, head)) return true;
  return false;
}

// Leaves of a left/right nested andConstraint chain, in order.
void chain_leaves(const Expr& e, std::vector<Expr>& out) {
  if (e.is_call("andConstraint")) {
    for (const auto& a : e.args) chain_leaves(a, out);
    return;
  }
  out.push_back(e);
}

Expr random_chain(std::mt19937& rng, int depth, int& counter) {
  if (depth == 0 || rng() % 3 == 0) return Expr::call("c" + std::to_string(counter++));
  return Expr::call("andConstraint",
                    {random_chain(rng, depth - 1, counter), random_chain(rng, depth - 1, counter)});
}

}  // namespace

TEST_CASE("matching single variables and heads") {
  auto b = match_pattern(pat("(DeleteCommitEventWrapper ?x)"),
                         parse_sexp("(DeleteCommitEventWrapper (foo))"));
  REQUIRE(b);
  CHECK(b->single.at("x") == parse_sexp("(foo)"));
  CHECK_FALSE(match_pattern(pat("(andConstraint ?a ?b)"), parse_sexp("(orConstraint x y)")));
  CHECK_FALSE(match_pattern(pat("f(?a)"), parse_pexp("f(x, y)")));
  CHECK(match_pattern(pat("f(?_, y)"), parse_pexp("f(x, y)")));
}

TEST_CASE("named arguments match as a set") {
  auto p = pat("f(a=?x, b=?y)");
  CHECK(match_pattern(p, parse_pexp("f(b=2, a=1)")));
  CHECK_FALSE(match_pattern(p, parse_pexp("f(a=1)")));
  CHECK_FALSE(match_pattern(p, parse_pexp("f(a=1, b=2, c=3)")));
}

TEST_CASE("segment splits agree with exhaustive enumeration") {
  auto b = match_pattern(pat("AND(?xs*, AND(?ys*))"), parse_pexp("AND(a(), AND(b(), c()))"));
  REQUIRE(b);
  CHECK(b->segments.at("xs") == std::vector<Expr>{Expr::call("a")});
  CHECK(b->segments.at("ys") == std::vector<Expr>{Expr::call("b"), Expr::call("c")});

  const Expr flatten = pat("AND(?xs*, AND(?ys*), ?zs*)");
  const Expr two_marks = pat("f(?xs*, b(), ?ys*, b(), ?zs*)");
  std::mt19937 rng(11);
  const std::vector<Expr> pool = {Expr::call("a"), Expr::call("b"),
                                  parse_pexp("AND(c())"), parse_pexp("AND()")};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Expr> items;
    int n = static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) items.push_back(pool[rng() % pool.size()]);

    // Flatten pattern: longest ?xs first, so the last AND child is picked.
    std::optional<Binding> want;
    for (int len = n - 1; len >= 0 && !want; --len) {
      const Expr& mid = items[static_cast<std::size_t>(len)];
      if (!mid.is_call("AND")) continue;
      Binding w;
      w.segments["xs"] = {items.begin(), items.begin() + len};
      w.segments["ys"] = mid.args;
      w.segments["zs"] = {items.begin() + len + 1, items.end()};
      want = w;
    }
    Expr e = Expr::call("AND", items);
    CHECK(match_pattern(flatten, e) == want);

    // Two markers: enumerate (i, j) with both segments longest first.
    std::optional<Binding> want2;
    for (int i = n - 1; i >= 0 && !want2; --i)
      for (int j = n - 1; j > i && !want2; --j) {
        if (!items[static_cast<std::size_t>(i)].is_call("b") ||
            !items[static_cast<std::size_t>(j)].is_call("b") ||
            !items[static_cast<std::size_t>(i)].args.empty())
          continue;
        Binding w;
        w.segments["xs"] = {items.begin(), items.begin() + i};
        w.segments["ys"] = {items.begin() + i + 1, items.begin() + j};
        w.segments["zs"] = {items.begin() + j + 1, items.end()};
        want2 = w;
      }
    CHECK(match_pattern(two_marks, Expr::call("f", items)) == want2);
  }
}

TEST_CASE("guards are checked on the final binding") {
  std::vector<Guard> g = {{"x", "text"}};
  CHECK(match_pattern(pat("f(?x)"), parse_pexp(R"(f("s"))"), g));
  CHECK_FALSE(match_pattern(pat("f(?x)"), parse_pexp("f(s)"), g));
  // Backtracking reaches a split the guard accepts.
  std::vector<Guard> call_guard = {{"y", "call"}};
  auto b = match_pattern(pat("f(?xs*, ?y, ?zs*)"), parse_pexp("f(g(), 1, 2)"), call_guard);
  REQUIRE(b);
  CHECK(b->single.at("y") == Expr::call("g"));
}

TEST_CASE("instantiation substitutes and splices") {
  Binding b;
  b.single["x"] = Expr::call("foo");
  CHECK(instantiate(pat("DeleteEvent(?x)"), b) == parse_pexp("DeleteEvent(foo())"));

  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Binding s;
    std::vector<Expr> all;
    for (const char* name : {"xs", "ys"}) {
      auto& seg = s.segments[name];
      int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) seg.push_back(Expr::call(std::string(name) + std::to_string(i)));
      all.insert(all.end(), seg.begin(), seg.end());
    }
    CHECK(instantiate(pat("AND(?xs*, ?ys*)"), s) == Expr::call("AND", all));
  }
  CHECK_THROWS_AS(instantiate(pat("f(?z)"), Binding{}), UnboundVariable);
}

TEST_CASE("builtins run during instantiation") {
  Binding b;
  b.single["s"] = Expr::text("John");
  CHECK(instantiate(pat("@symbol(?s)"), b) == Expr::symbol("John"));
  b.single["s"] = Expr::text("two words");
  CHECK(instantiate(pat("@symbol(?s)"), b) == Expr::text("two words"));
}

TEST_CASE("the first example simplifies to the bundled step") {
  auto turns = load_jsonl(t::data_path("corpus/mini_corpus.jsonl"));
  Expr e = rewrite_fixpoint(parse_sexp(turns.front().original), t::simplify_rules(),
                            t::rewrite_opts());
  CHECK(contains_head(e, "DeleteEvent"));
  CHECK(contains_head(e, "FindManager"));
  CHECK_FALSE(contains_head(e, "RecipientWithNameLike"));
  CHECK_FALSE(contains_head(e, "DeletePreflightEventWrapper"));
  CHECK(print_pexp(e).find("FindManager(John)") != std::string::npos);
}

TEST_CASE("constraint chains flatten in leaf order") {
  CHECK(rewrite_fixpoint(parse_sexp("(andConstraint (andConstraint (a) (b)) (c))"),
                         t::simplify_rules()) == parse_pexp("AND(a(), b(), c())"));
  std::mt19937 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    int counter = 0;
    Expr chain = random_chain(rng, 5, counter);
    std::vector<Expr> leaves;
    chain_leaves(chain, leaves);
    Expr want = leaves.size() == 1 ? leaves.front() : Expr::call("AND", leaves);
    CHECK(rewrite_fixpoint(chain, t::simplify_rules()) == want);
  }
}

TEST_CASE("single-use pure bindings are inlined") {
  RuleSet rules = t::simplify_rules();
  CHECK(rewrite_fixpoint(parse_sexp("(let (x1 (FindManager John)) (FindEvents x1))"), rules,
                         t::rewrite_opts()) == parse_pexp("FindEvents(FindManager(John))"));
  // Used twice: stays.
  Expr twice = parse_sexp("(let (x1 (FindManager John)) (f x1 x1))");
  CHECK(rewrite_fixpoint(twice, rules, t::rewrite_opts()) == twice);
  // Effectful: stays.
  Expr eff = parse_sexp("(let (x1 (DeleteEvent 3)) (f x1))");
  CHECK(rewrite_fixpoint(eff, rules, t::rewrite_opts()) == eff);
  // Later binding sees earlier ones; x2 shadows nothing.
  CHECK(inline_single_use(parse_pexp("let(x1=a(), x2=g(x1), h(x2))")) ==
        parse_pexp("h(g(a()))"));
  // Outer x2 goes first, after which g(k()) is closed and safe to move.
  CHECK(inline_single_use(parse_pexp("let(x2=k(), x1=g(x2), let(x2=m(), f(x1, x2)))")) ==
        parse_pexp("let(x2=m(), f(g(k()), x2))"));
  // An effectful x2 stays, and moving g(x2) under the inner x2 would capture it.
  Expr capture = parse_pexp("let(x2=DeleteEvent(1), x1=g(x2), let(x2=m(), f(x1, x2)))");
  Expr out = inline_single_use(capture, t::rewrite_opts());
  REQUIRE(out.kind == ExprKind::Let);
  CHECK(out.named.size() == 2);
  CHECK(print_pexp(out) == "let(x2=DeleteEvent(1), x1=g(x2), let(x2=m(), f(x1, x2)))");
}

TEST_CASE("rule files") {
  CHECK(t::simplify_rules().size() >= 6);
  CHECK(parse_rules("").empty());
  CHECK(parse_rules("# only a comment\n\n").empty());
  CHECK_THROWS_AS(parse_rules("rule r priority 1 phase simplify\n f(?x) => g(?y)\n"),
                  UnboundVariable);
  CHECK_THROWS_AS(parse_rules("rule r priority 1 phase simplify\n f(?x) => g(?x)\n"
                              "rule r priority 2 phase simplify\n f(?x) => h(?x)\n"),
                  DuplicateRuleName);
  CHECK_THROWS_AS(parse_rules("rule a priority 1 phase simplify\n f(?x) => g(?x)\n"
                              "rule b priority 1 phase simplify\n f(?x) => h(?x)\n"),
                  RuleSyntaxError);
  CHECK_NOTHROW(parse_rules("rule a priority 1 phase simplify\n f(?x) => g(?x)\n"
                            "rule b priority 1 phase expand\n f(?x) => h(?x)\n"));
  CHECK_THROWS_AS(parse_rules("rule a priority 1 phase simplify\n f(?x, ?x) => g(?x)\n"),
                  RuleSyntaxError);
  CHECK_THROWS_AS(parse_rules("rule a priority 1 phase simplify\n f(?x) => g(?x)\n"
                              " where ?x : shiny\n"),
                  RuleSyntaxError);
  CHECK_THROWS_AS(parse_rules("rule a priority 1 phase simplify\n f(?x) => g(?_)\n"),
                  RuleSyntaxError);
  try {
    parse_rules("\n\nrule a priority x phase simplify\n f() => g()\n");
    FAIL("expected a syntax error");
  } catch (const RuleSyntaxError& e) {
    CHECK(e.line() == 3);
  }
  RuleSet multi = parse_rules(
      "rule wide priority 3 phase simplify  # trailing comment\n"
      "  (f\n    ?x)\n  => g(\"#not a comment\",\n     ?x)\n");
  REQUIRE(multi.size() == 1);
  CHECK(multi.rules[0].rhs == pat(R"(g("#not a comment", ?x))"));
}

TEST_CASE("priority decides between overlapping rules") {
  RuleSet rules = parse_rules(
      "rule low priority 1 phase simplify\n f(?x) => low(?x)\n"
      "rule high priority 9 phase simplify\n f(?x) => high(?x)\n");
  CHECK(rules.rules.front().name == "high");
  CHECK(rewrite_fixpoint(parse_pexp("f(1)"), rules) == parse_pexp("high(1)"));
}

TEST_CASE("runaway rules hit the pass cap") {
  RuleSet grow = parse_rules("rule grow priority 1 phase simplify\n f(?x) => f(g(?x))\n");
  RewriteOptions opts;
  opts.max_passes = 25;
  try {
    rewrite_fixpoint(parse_pexp("f(1)"), grow, opts);
    FAIL("expected divergence");
  } catch (const RewriteDivergence& e) {
    CHECK(e.cap() == 25);
  }
}

TEST_CASE("stats count passes and firings") {
  RewriteStats stats;
  rewrite_fixpoint(parse_sexp("(andConstraint (andConstraint (a) (b)) (c))"),
                   t::simplify_rules(), {}, &stats);
  CHECK(stats.firings.at("and_constraint") == 2);
  CHECK(stats.firings.at("flatten_and") == 1);
  CHECK(stats.passes >= 2);
}

TEST_CASE("simplification is idempotent and never grows the corpus") {
  auto turns = load_jsonl(t::data_path("corpus/mini_corpus.jsonl"));
  for (const auto& turn : turns) {
    Expr original = parse_sexp(turn.original);
    Expr once = rewrite_fixpoint(original, t::simplify_rules(), t::rewrite_opts());
    Expr twice = rewrite_fixpoint(once, t::simplify_rules(), t::rewrite_opts());
    CHECK_MESSAGE(once == twice, turn.id());
    CHECK_MESSAGE(node_count(once) < node_count(original), turn.id());
    CHECK(tokenize_linear(once).size() < tokenize_linear(original).size());
  }
}

TEST_CASE("expansion rules") {
  RuleSet rules = t::expand_rules();
  CHECK(rewrite_fixpoint(parse_pexp("with_attendee(John, Emily, Bob)"), rules) ==
        parse_pexp("AND(with_attendee(John), with_attendee(Emily), with_attendee(Bob))"));
  Expr e = rewrite_fixpoint(parse_pexp("FindEvents()"), rules);
  CHECK(e == parse_pexp("FindEvents(of_type(Event))"));
}
