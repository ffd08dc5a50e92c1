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
#include "doctest.h"
#include "support.hpp"

using namespace dflow;
using dflow::testing::ExprGen;

namespace {

std::size_t syntax_error_at(std::string_view text, bool sexp) {
  try {
    if (sexp) parse_sexp(text);
    else parse_pexp(text);
  } catch (const SyntaxError& e) {
    return e.position();
  }
  return 0;
}

// Independent token count: one per head, leaf, bracket and "=" (commas are
// not counted).
std::size_t count_tokens(const Expr& e) {
  if (e.kind != ExprKind::Call && e.kind != ExprKind::Let) return 1;
  std::size_t n = 3;
  for (const auto& a : e.args) n += count_tokens(a);
  for (const auto& [k, v] : e.named) n += 2 + count_tokens(v);
  return n;
}

}  // namespace

TEST_CASE("s-expressions read nested calls") {
  Expr e = parse_sexp("(FindManager (John))");
  REQUIRE(e.is_call("FindManager"));
  REQUIRE(e.args.size() == 1);
  CHECK(e.args[0].is_call("John"));
  CHECK(e.args[0].args.empty());

  Expr chain = parse_sexp("(DeleteCommitEventWrapper (DeletePreflightEventWrapper (x)))");
  REQUIRE(chain.is_call("DeleteCommitEventWrapper"));
  REQUIRE(chain.args.size() == 1);
  REQUIRE(chain.args[0].is_call("DeletePreflightEventWrapper"));
  CHECK(chain.args[0].args[0].is_call("x"));
}

TEST_CASE("s-expression named arguments, literals and let") {
  Expr e = parse_sexp(R"((CreateEvent :subject "lunch" :start 12 :flag true))");
  REQUIRE(e.named.size() == 3);
  CHECK(e.named[0].first == "subject");
  CHECK(e.named[0].second.kind == ExprKind::Text);
  CHECK(e.named[0].second.name == "lunch");
  CHECK(e.named[1].second.kind == ExprKind::Number);
  CHECK(e.named[2].second.kind == ExprKind::Bool);

  Expr l = parse_sexp("(let (x1 (FindManager John)) (f x1 x1))");
  REQUIRE(l.kind == ExprKind::Let);
  CHECK(l.named.size() == 1);
  CHECK(l.let_body().args[0].kind == ExprKind::VarRef);
  CHECK(l.let_body().args[0].name == "x1");
}

TEST_CASE("unbalanced input reports the end offset") {
  CHECK(syntax_error_at("(f (g", true) == 6);
  CHECK(syntax_error_at("f(g(", false) == 5);
  CHECK(syntax_error_at("", true) == 1);
  CHECK(syntax_error_at("f(x) y", false) == 6);
}

TEST_CASE("call syntax") {
  Expr e = parse_pexp("FindManager(John)");
  REQUIRE(e.is_call("FindManager"));
  REQUIRE(e.args.size() == 1);
  CHECK(e.args[0].kind == ExprKind::Symbol);
  CHECK(e.args[0].name == "John");

  Expr a = parse_pexp("AND(a(), b(), c())");
  REQUIRE(a.args.size() == 3);
  for (const auto& c : a.args) CHECK((c.is_call() && c.args.empty()));

  Expr n = parse_pexp(R"(CreateEvent(subject="lunch"))");
  CHECK(n.args.empty());
  REQUIRE(n.named.size() == 1);
  CHECK(n.named[0].first == "subject");
  CHECK(n.named[0].second == Expr::text("lunch"));
}

TEST_CASE("call syntax rejects malformed argument lists") {
  CHECK(syntax_error_at("f(a=1, b)", false) > 0);
  CHECK(syntax_error_at("f(a=1, a=2)", false) > 0);
  CHECK(syntax_error_at("f(,)", false) > 0);
  CHECK(syntax_error_at("let(x=1)", false) > 0);
  CHECK(syntax_error_at("let(x=1, x, y=2)", false) > 0);
}

TEST_CASE("canonical printing") {
  CHECK(print_pexp(Expr::call("AND", {Expr::call("a"), Expr::call("b")})) == "AND(a(), b())");
  CHECK(print_pexp(Expr::symbol("John")) == "John");
  CHECK(print_pexp(parse_sexp(R"((f :k "v" 1))")) == R"(f(1, k="v"))");
  CHECK(print_sexp(parse_pexp(R"(f(1, k="v"))")) == R"((f 1 :k "v"))");
  CHECK(print_pexp(parse_sexp("(let (x1 (g)) (f x1))")) == "let(x1=g(), f(x1))");
}

TEST_CASE("token counts") {
  CHECK(tokenize_linear(parse_pexp("FindManager(John)")) ==
        std::vector<std::string>{"FindManager", "(", "John", ")"});
  CHECK(tokenize_linear(Expr::symbol("x")).size() == 1);
  CHECK(tokenize_linear(parse_pexp("AND(a(), b())")).size() == 9);
  // Same tree, same tokens, whichever syntax it came from.
  Expr s = parse_sexp(R"((CreateEvent :subject "x" (Tomorrow)))");
  Expr p = parse_pexp(R"(CreateEvent(Tomorrow(), subject="x"))");
  CHECK(tokenize_linear(s) == tokenize_linear(p));
}

TEST_CASE("corpus round trips in both syntaxes") {
  auto turns = load_jsonl(dflow::testing::data_path("corpus/mini_corpus.jsonl"));
  REQUIRE(turns.size() == 25);
  for (const auto& t : turns) {
    Expr e = parse_sexp(t.original);
    CHECK_MESSAGE(parse_sexp(print_sexp(e)) == e, t.id());
    CHECK_MESSAGE(parse_pexp(print_pexp(e)) == e, t.id());
    CHECK(tokenize_linear(e).size() == count_tokens(e));
  }
}

TEST_CASE("random trees round trip") {
  ExprGen gen(20260101);
  for (int i = 0; i < 2000; ++i) {
    Expr e = gen.tree(1 + gen.pick(6));
    std::string p = print_pexp(e);
    std::string s = print_sexp(e);
    Expr from_p = parse_pexp(p);
    Expr from_s = parse_sexp(s);
    REQUIRE_MESSAGE(from_p == e, p);
    REQUIRE_MESSAGE(from_s == e, s);
    CHECK(print_pexp(from_p) == p);
    CHECK(tokenize_linear(e).size() == count_tokens(e));
    CHECK(tokenize_linear(from_s) == tokenize_linear(from_p));
  }
}

TEST_CASE("arbitrary text parses or fails with a position") {
  std::mt19937 rng(7);
  const std::string alphabet = "()=,:\"\\ abcxyz019.-?*@\n\t";
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    int len = std::uniform_int_distribution<int>(0, 24)(rng);
    for (int k = 0; k < len; ++k)
      text += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    for (bool sexp : {true, false}) {
      try {
        if (sexp) parse_sexp(text);
        else parse_pexp(text);
      } catch (const SyntaxError& e) {
        CHECK(e.position() >= 1);
        CHECK(e.position() <= text.size() + 1);
      }
    }
  }
}

TEST_CASE("deep nesting is refused rather than overflowing") {
  std::string deep(5000, '(');
  CHECK_THROWS_AS(parse_sexp(deep), SyntaxError);
  std::string calls;
  for (int i = 0; i < 5000; ++i) calls += "f(";
  CHECK_THROWS_AS(parse_pexp(calls), SyntaxError);
}
