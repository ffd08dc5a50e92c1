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
#include <fstream>
#include <map>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace dflow;
namespace t = dflow::testing;

namespace {

std::vector<DatasetTurn> corpus() { return load_jsonl(t::data_path("corpus/mini_corpus.jsonl")); }

std::map<std::string, std::string> goldens() {
  std::map<std::string, std::string> out;
  std::ifstream in(t::data_path("corpus/mini_corpus.golden.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    out[j["dialogue_id"].get<std::string>() + "#" + std::to_string(j["turn_index"].get<int>())] =
        j["simplified"].get<std::string>();
  }
  return out;
}

EquivalenceOptions equivalence_options() {
  EquivalenceOptions o;
  o.clock = default_clock();
  o.expand_rules = t::expand_rules();
  o.rewrite = t::rewrite_opts();
  return o;
}

std::vector<DatasetTurn> simplified_corpus() {
  auto turns = corpus();
  simplify_dataset(turns, t::simplify_rules(), t::rewrite_opts());
  return turns;
}

}  // namespace

TEST_CASE("loading corpora") {
  auto turns = corpus();
  CHECK(turns.size() == 25);
  CHECK(turns.front().id() == "d01#0");
  CHECK(parse_jsonl("").empty());
  CHECK(parse_jsonl("\n  \n").empty());
  try {
    parse_jsonl("{\"dialogue_id\": \"a\", \"turns\": []}\n{\"dialogue_id\": \"b\"}\n");
    FAIL("expected MalformedRecord");
  } catch (const MalformedRecord& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_jsonl("[1, 2]"), MalformedRecord);
  CHECK_THROWS_AS(parse_jsonl("{\"dialogue_id\": \"a\", \"turns\": [{}]}"), MalformedRecord);
  CHECK_THROWS_AS(load_jsonl("/nonexistent/corpus.jsonl"), IoError);
}

TEST_CASE("the corpus simplifies to the goldens") {
  auto want = goldens();
  REQUIRE(want.size() == 25);
  auto turns = corpus();
  SimplifySummary s = simplify_dataset(turns, t::simplify_rules(), t::rewrite_opts());
  CHECK(s.simplified == 25);
  CHECK(s.failed == 0);
  for (const auto& turn : turns) {
    REQUIRE(turn.simplified);
    CHECK_MESSAGE(*turn.simplified == want.at(turn.id()), turn.id());
  }
  // Serialized output parses back to the same records.
  auto back = parse_jsonl(to_jsonl(turns));
  REQUIRE(back.size() == turns.size());
  for (std::size_t i = 0; i < turns.size(); ++i) {
    CHECK(back[i].id() == turns[i].id());
    CHECK(back[i].original == turns[i].original);
    CHECK(back[i].utterance == turns[i].utterance);
    CHECK(back[i].simplified == turns[i].simplified);
  }
}

TEST_CASE("simplified programs are fixpoints") {
  for (const auto& [id, text] : goldens()) {
    Expr e = parse_pexp(text);
    CHECK_MESSAGE(rewrite_fixpoint(e, t::simplify_rules(), t::rewrite_opts()) == e, id);
  }
}

TEST_CASE("per-turn failures are recorded") {
  auto turns = parse_jsonl(
      R"j({"dialogue_id": "x", "turns": [{"utterance": "", "lispress": "(f 1)"}]})j");
  RuleSet grow = parse_rules("rule grow priority 1 phase simplify\n f(?x) => f(g(?x))\n");
  SimplifySummary s = simplify_dataset(turns, grow);
  CHECK(s.simplified == 0);
  CHECK(s.failed == 1);
  CHECK_FALSE(turns[0].simplified);
  REQUIRE(turns[0].error);

  auto broken = parse_jsonl(R"j({"dialogue_id": "y", "turns": [{"lispress": "(f (g"}]})j");
  CHECK(simplify_dataset(broken, t::simplify_rules()).failed == 1);
  CHECK(broken[0].error->find("SyntaxError") == 0);
}

TEST_CASE("nearest-rank quantiles") {
  CHECK(nearest_rank({2, 11, 20}, 0.25) == 2);
  CHECK(nearest_rank({2, 11, 20}, 0.5) == 11);
  CHECK(nearest_rank({2, 11, 20}, 0.75) == 20);
  CHECK(nearest_rank({1, 2, 3, 4}, 0.5) == 2);
  CHECK(nearest_rank({7}, 0.0) == 7);
  CHECK_THROWS_AS(nearest_rank({}, 0.5), EmptySample);
  CHECK_THROWS_AS(nearest_rank({1}, 1.5), std::invalid_argument);

  // Definition: the smallest sample value v with #(x <= v) >= q * n. With
  // q = k / 20 the comparison is exact in integers.
  std::mt19937 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::size_t> xs(1 + rng() % 30);
    for (auto& x : xs) x = rng() % 50;
    std::sort(xs.begin(), xs.end());
    int k = static_cast<int>(rng() % 21);
    std::size_t want = xs.back();
    for (std::size_t v : xs) {
      std::size_t count = static_cast<std::size_t>(std::count_if(
          xs.begin(), xs.end(), [v](std::size_t x) { return x <= v; }));
      if (20 * count >= static_cast<std::size_t>(k) * xs.size()) {
        want = v;
        break;
      }
    }
    CHECK(nearest_rank(xs, k / 20.0) == want);
  }
}

TEST_CASE("simplified programs are shorter") {
  auto turns = simplified_corpus();
  std::vector<double> qs = {0.25, 0.5, 0.75};
  LengthStats orig = length_quantiles(turns, Style::Original, qs);
  LengthStats simp = length_quantiles(turns, Style::Simplified, qs);
  CHECK(orig.n == 25);
  for (double q : qs) CHECK(simp.at(q) < orig.at(q));
  CHECK(2 * simp.at(0.5) <= orig.at(0.5));
  CHECK_THROWS_AS(length_quantiles({}, Style::Original, qs), EmptySample);
  CHECK_THROWS_AS(length_quantiles(corpus(), Style::Simplified, qs), std::invalid_argument);
}

TEST_CASE("execution equivalence") {
  auto turns = simplified_corpus();
  EquivalenceReport all = execution_equivalence(turns, t::registry(), t::fixture(),
                                                equivalence_options());
  REQUIRE(all.verdicts.size() == 25);
  for (const auto& v : all.verdicts) CHECK_MESSAGE(v.kind == TurnVerdict::Kind::Equal, v.detail);
  CHECK(all.match_rate == 1.0);
  CHECK(all.verdicts.front().verdict() == "equal");

  auto negative = load_jsonl(t::data_path("corpus/negative_control.jsonl"));
  REQUIRE(negative.size() == 1);
  REQUIRE(negative[0].simplified);
  EquivalenceReport neg = execution_equivalence(negative, t::registry(), t::fixture(),
                                                equivalence_options());
  CHECK(neg.verdicts[0].verdict() == "differ");
  CHECK(neg.match_rate == 0.0);
}

TEST_CASE("equivalence reports infrastructure failures") {
  auto turns = parse_jsonl(
      R"j({"dialogue_id": "a", "turns": [)j"
      R"j({"lispress": "(FindManager (PersonName.apply \"John\"))", "simplified": "FindManager(John"},)j"
      R"j({"lispress": "(FindManager (PersonName.apply \"John\"))", "simplified": "Frobnicate()"},)j"
      R"j({"lispress": "(FindManager (PersonName.apply \"John\"))"}]})j");
  EquivalenceReport r = execution_equivalence(turns, t::registry(), t::fixture(),
                                              equivalence_options());
  REQUIRE(r.verdicts.size() == 3);
  CHECK(r.verdicts[0].verdict() == "error(SyntaxError)");
  CHECK(r.verdicts[1].verdict() == "error(UnknownFunction)");
  CHECK(r.verdicts[2].verdict() == "error(NotSimplified)");
  auto lines = r.to_jsonl();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 3);
  CHECK(nlohmann::json::parse(lines.substr(0, lines.find('\n')))["turn_id"] == "a#0");
}

TEST_CASE("dialogues share history, and only within themselves") {
  const std::string manager =
      R"j({"lispress": "(Yield (Execute (FindManager (Execute (refer (extensionConstraint (RecipientWithNameLike (EmptyStructConstraint) (PersonName.apply \"Emily\"))))))))", "simplified": "FindManager(Emily)"})j";
  const std::string that_person =
      R"j({"lispress": "(Yield (Execute (refer (extensionConstraint (EmptyStructConstraint :type Recipient)))))", "simplified": "refer(of_type(Recipient))"})j";
  auto turns = parse_jsonl(R"j({"dialogue_id": "a", "turns": [)j" + manager + ", " + that_person +
                           "]}\n" + R"j({"dialogue_id": "b", "turns": [)j" + that_person + "]}");
  EquivalenceReport r = execution_equivalence(turns, t::registry(), t::fixture(),
                                              equivalence_options());
  REQUIRE(r.verdicts.size() == 3);
  CHECK(r.verdicts[0].verdict() == "equal");
  CHECK(r.verdicts[1].verdict() == "equal");
  // In a fresh dialogue the original falls back to the database, which has
  // six people; the simplified program finds nothing in its history.
  CHECK(r.verdicts[2].verdict() == "differ");
}
