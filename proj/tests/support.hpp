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

// Shared helpers for the test binaries: data paths, a default engine and a
// random expression generator.

#ifndef DFLOW_TESTS_SUPPORT_HPP_
#define DFLOW_TESTS_SUPPORT_HPP_

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dflow/calendar.hpp"
#include "dflow/dataset.hpp"
#include "dflow/db.hpp"
#include "dflow/executor.hpp"
#include "dflow/expansion.hpp"
#include "dflow/expr.hpp"
#include "dflow/graph.hpp"
#include "dflow/rewrite.hpp"

namespace dflow::testing {

inline std::string data_path(const std::string& rel) { return std::string(DFLOW_DATA_DIR) + "/" + rel; }

inline const FunctionRegistry& registry() {
  static const FunctionRegistry r = make_default_registry();
  return r;
}

inline const StubDb& fixture() {
  static const StubDb db = StubDb::load(data_path("fixture.json"));
  return db;
}

inline const RuleSet& simplify_rules() {
  static const RuleSet r = load_rules(data_path("rules/simplify.rules"));
  return r;
}

inline const RuleSet& expand_rules() {
  static const RuleSet r = load_rules(data_path("rules/expand.rules"));
  return r;
}

inline RewriteOptions rewrite_opts() {
  RewriteOptions o;
  o.is_effectful = [](std::string_view n) { return registry().is_effectful(n); };
  return o;
}

inline DialogueContext fresh_context(bool fallback_db = false) {
  DialogueContext ctx(registry(), fixture(), default_clock());
  ctx.options.fallback_db = fallback_db;
  return ctx;
}

// Parses call syntax and runs the expand phase.
inline Expr expanded(const std::string& text) {
  return expand(parse_pexp(text), registry(), expand_rules(), rewrite_opts());
}

inline EvalResult run(const std::string& text, DialogueContext& ctx) {
  return evaluate(build_graph(expanded(text), ctx), ctx);
}

// Turn expressions used to populate random dialogue contexts. Some fail
// (MultipleMatches) and one deletes an event, so histories hold partial
// results and stale references.
inline const std::vector<std::string>& turn_pool() {
  static const std::vector<std::string> pool = {
      "FindManager(John)",
      "FindPerson(Emily)",
      "FindEvents(with_attendee(Dana))",
      "singleton(FindEvents(starts_at(Today())))",
      "singleton(FindEvents(with_attendee(Alice)))",
      "Event.subject(singleton(FindEvents(with_attendee(Alice))))",
      "Today()",
      "Tomorrow()",
      "NumberPM(3)",
      "size(FindEvents(with_attendee(John)))",
      "FindManager(FindManager(Carol))",
      "DeleteEvent(has_subject(\"Lunch\"))",
      "singleton(FindEvents(with_attendee(Bob)))",
  };
  return pool;
}

inline DialogueContext random_context(std::mt19937& rng, int max_turns = 5) {
  DialogueContext ctx = fresh_context();
  int turns = static_cast<int>(rng() % static_cast<unsigned>(max_turns + 1));
  for (int i = 0; i < turns; ++i) run(turn_pool()[rng() % turn_pool().size()], ctx);
  return ctx;
}

// Newest-first scan written against the node table alone: turns from last to
// first, nodes of a turn from highest id down.
template <typename Pred>
std::optional<NodeId> oracle_refer(const DialogueContext& ctx, Pred pred) {
  for (int t = static_cast<int>(ctx.turns().size()) - 1; t >= 0; --t) {
    std::optional<NodeId> best;
    for (const auto& n : ctx.nodes())
      if (n.turn_index == t && n.result && pred(n, ctx.db()) && (!best || raw(n.id) > raw(*best)))
        best = n.id;
    if (best) return best;
  }
  return std::nullopt;
}

struct ReferQuery {
  std::string text;
  std::function<bool(const GraphNode&, const StubDb&)> matches;
};

inline const std::vector<ReferQuery>& refer_queries() {
  auto person_named = [](std::string name) {
    return [name](const GraphNode& n, const StubDb& db) {
      const auto* r = n.result->get_if<EntityRef>();
      if (n.type_tag.str() != "Recipient" || !r || r->kind != EntityKind::Recipient) return false;
      const Person* p = db.person(r->id);
      return p && p->name == name;
    };
  };
  auto live_event = [](const GraphNode& n, const StubDb& db) -> const Event* {
    const auto* r = n.result->get_if<EntityRef>();
    if (n.type_tag.str() != "Event" || !r || r->kind != EntityKind::Event) return nullptr;
    return db.event(r->id);
  };
  auto tagged = [](std::string tag) {
    return [tag](const GraphNode& n, const StubDb&) { return n.type_tag.str() == tag; };
  };
  static const std::vector<ReferQuery> qs = {
      {"of_type(Event)", tagged("Event")},
      {"of_type(Recipient)", tagged("Recipient")},
      {"of_type(Date)", tagged("Date")},
      {"of_type(Int)", tagged("Int")},
      {"of_type(Text)", tagged("Text")},
      {"has_name(\"Dana\")", person_named("Dana")},
      {"has_name(\"Alice\")", person_named("Alice")},
      {"with_attendee(Dana)",
       [live_event](const GraphNode& n, const StubDb& db) {
         const Event* e = live_event(n, db);
         if (!e) return false;
         for (auto id : e->attendees)
           if (db.person(id)->name == "Dana") return true;
         return false;
       }},
      {"starts_at(Today())",
       [live_event](const GraphNode& n, const StubDb& db) {
         const Event* e = live_event(n, db);
         return e && format_date(e->start.date()) == "2022-01-01";
       }},
  };
  return qs;
}

// Random trees over every surface construct: calls with positional and named
// arguments, all literal kinds, lets with sequential scoping.
class ExprGen {
 public:
  explicit ExprGen(std::uint32_t seed) : rng_(seed) {}

  Expr tree(int depth) {
    std::vector<std::string> scope;
    return node(depth, scope);
  }

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

 private:
  Expr node(int depth, std::vector<std::string>& scope) {
    int roll = pick(10);
    if (depth <= 1 || roll < 3) return leaf(scope);
    if (roll == 3) return let(depth, scope);
    static const char* heads[] = {"f", "FindManager", "AND", "Event.id", "with_attendee",
                                  "g_2", "_h", "DeleteEvent"};
    Expr e = Expr::call(heads[pick(8)]);
    int nargs = pick(4);
    for (int i = 0; i < nargs; ++i) e.args.push_back(node(depth - 1, scope));
    int nnamed = pick(3);
    static const char* keys[] = {"subject", "constraint", "k1", "start"};
    for (int i = 0; i < nnamed; ++i) {
      std::string k = keys[(i + pick(2)) % 4];
      bool dup = false;
      for (const auto& [n, v] : e.named) dup = dup || n == k;
      if (!dup) e.named.emplace_back(k, node(depth - 1, scope));
    }
    return e;
  }

  Expr let(int depth, std::vector<std::string>& scope) {
    Expr::Named bindings;
    std::size_t mark = scope.size();
    int n = 1 + pick(2);
    for (int i = 0; i < n; ++i) {
      std::string name = "x" + std::to_string(mark + static_cast<std::size_t>(i) + 1);
      bindings.emplace_back(name, node(depth - 1, scope));
      scope.push_back(name);
    }
    Expr body = node(depth - 1, scope);
    scope.resize(mark);
    return Expr::let(std::move(bindings), std::move(body));
  }

  Expr leaf(const std::vector<std::string>& scope) {
    switch (pick(6)) {
      case 0: {
        static const char* names[] = {"John", "Dana", "Event", "a_b", "Z9", "Event.start"};
        return Expr::symbol(names[pick(6)]);
      }
      case 1: {
        static const char* texts[] = {"lunch", "", "say \"hi\"", "back\\slash", "two\nlines",
                                      "tab\there", "caf\xc3\xa9", "(parens), =:"};
        return Expr::text(texts[pick(8)]);
      }
      case 2: {
        static const char* nums[] = {"0", "42", "-7", "3.25", "-0.5", "1000000"};
        return Expr::number(nums[pick(6)]);
      }
      case 3: return Expr::boolean(pick(2) == 1);
      case 4:
        if (!scope.empty()) return Expr::var(scope[static_cast<std::size_t>(pick(static_cast<int>(scope.size())))]);
        return Expr::call("Tomorrow");
      default: return Expr::call("Today");
    }
  }

  std::mt19937 rng_;
};

}  // namespace dflow::testing

#endif  // DFLOW_TESTS_SUPPORT_HPP_
