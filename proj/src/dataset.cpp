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

#include "dflow/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dflow/executor.hpp"
#include "dflow/expansion.hpp"
#include "dflow/graph.hpp"
#include "json.hpp"

namespace dflow {

using json = nlohmann::json;

std::vector<DatasetTurn> parse_jsonl(std::string_view text) {
  std::vector<DatasetTurn> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecord(lineno, std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw MalformedRecord(lineno, "expected a JSON object");
    if (!doc.contains("dialogue_id") || !doc["dialogue_id"].is_string())
      throw MalformedRecord(lineno, "missing string field 'dialogue_id'");
    if (!doc.contains("turns") || !doc["turns"].is_array())
      throw MalformedRecord(lineno, "missing array field 'turns'");
    int index = 0;
    for (const auto& t : doc["turns"]) {
      if (!t.is_object() || !t.contains("lispress") || !t["lispress"].is_string())
        throw MalformedRecord(lineno, "turn " + std::to_string(index) + " lacks 'lispress'");
      DatasetTurn turn;
      turn.dialogue_id = doc["dialogue_id"].get<std::string>();
      turn.turn_index = index++;
      if (t.contains("utterance") && t["utterance"].is_string())
        turn.utterance = t["utterance"].get<std::string>();
      turn.original = t["lispress"].get<std::string>();
      if (t.contains("simplified") && t["simplified"].is_string())
        turn.simplified = t["simplified"].get<std::string>();
      out.push_back(std::move(turn));
    }
  }
  return out;
}

std::vector<DatasetTurn> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_jsonl(ss.str());
}

std::string to_jsonl(const std::vector<DatasetTurn>& turns) {
  std::string out;
  std::size_t i = 0;
  while (i < turns.size()) {
    json doc = {{"dialogue_id", turns[i].dialogue_id}, {"turns", json::array()}};
    std::size_t j = i;
    for (; j < turns.size() && turns[j].dialogue_id == turns[i].dialogue_id; ++j) {
      json t = {{"utterance", turns[j].utterance}, {"lispress", turns[j].original}};
      if (turns[j].simplified) t["simplified"] = *turns[j].simplified;
      doc["turns"].push_back(std::move(t));
    }
    out += doc.dump() + "\n";
    i = j;
  }
  return out;
}

SimplifySummary simplify_dataset(std::vector<DatasetTurn>& turns, const RuleSet& rules,
                                 const RewriteOptions& opts) {
  SimplifySummary s;
  for (auto& t : turns) {
    t.simplified.reset();
    t.error.reset();
    try {
      Expr e = parse_sexp(t.original);
      t.simplified = print_pexp(rewrite_fixpoint(e, rules, opts));
      ++s.simplified;
    } catch (const SyntaxError& e) {
      t.error = std::string("SyntaxError at ") + std::to_string(e.position()) + ": " + e.what();
      ++s.failed;
    } catch (const std::exception& e) {
      t.error = e.what();
      ++s.failed;
    }
  }
  return s;
}

const char* to_string(Style style) {
  return style == Style::Original ? "original" : "simplified";
}

std::size_t LengthStats::at(double q) const {
  for (const auto& [k, v] : quantiles)
    if (std::abs(k - q) < 1e-12) return v;
  throw std::out_of_range("quantile not computed");
}

std::size_t nearest_rank(const std::vector<std::size_t>& sorted, double q) {
  if (sorted.empty()) throw EmptySample();
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile outside [0, 1]");
  double n = static_cast<double>(sorted.size());
  // The epsilon keeps q * n that are integers in exact arithmetic (0.5 * 4)
  // from rounding up a rank through floating-point noise.
  auto rank = static_cast<std::ptrdiff_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

LengthStats length_quantiles(const std::vector<DatasetTurn>& turns, Style style,
                             const std::vector<double>& qs) {
  if (turns.empty()) throw EmptySample();
  std::vector<std::size_t> lengths;
  lengths.reserve(turns.size());
  for (const auto& t : turns) {
    if (style == Style::Original) {
      lengths.push_back(tokenize_linear(parse_sexp(t.original)).size());
    } else {
      if (!t.simplified) throw std::invalid_argument(t.id() + " has no simplified form");
      lengths.push_back(tokenize_linear(parse_pexp(*t.simplified)).size());
    }
  }
  std::sort(lengths.begin(), lengths.end());
  LengthStats stats;
  stats.style = style;
  stats.n = lengths.size();
  for (double q : qs) stats.quantiles.emplace_back(q, nearest_rank(lengths, q));
  return stats;
}

// ---------------------------------------------------------------------------
// Execution equivalence

std::string TurnVerdict::verdict() const {
  switch (kind) {
    case Kind::Equal: return "equal";
    case Kind::Differ: return "differ";
    case Kind::Error: return "error(" + error_kind + ")";
  }
  return "?";
}

std::size_t EquivalenceReport::count(TurnVerdict::Kind kind) const {
  return static_cast<std::size_t>(std::count_if(
      verdicts.begin(), verdicts.end(), [&](const TurnVerdict& v) { return v.kind == kind; }));
}

std::string EquivalenceReport::to_jsonl() const {
  std::string out;
  for (const auto& v : verdicts)
    out += json{{"turn_id", v.turn_id}, {"verdict", v.verdict()}, {"detail", v.detail}}.dump() +
           "\n";
  return out;
}

namespace {

// Outcome of one pipeline on one turn.
struct Run {
  std::optional<std::string> failure_kind;  // infrastructure failure
  std::string failure;
  EvalResult result;
};

std::string describe(const Run& r) {
  if (r.failure_kind) return *r.failure_kind + ": " + r.failure;
  if (r.result.ok()) return r.result.value->str();
  const auto& e = *r.result.error;
  return std::string(to_string(e.kind)) + (e.slot ? "(" + *e.slot + ")" : "");
}

template <typename F>
Run guarded(F&& build_and_eval) {
  Run r;
  try {
    r.result = build_and_eval();
  } catch (const SyntaxError& e) {
    r.failure_kind = "SyntaxError";
    r.failure = e.what();
  } catch (const BuildError& e) {
    r.failure_kind = to_string(e.kind());
    r.failure = e.what();
  } catch (const ExpansionError& e) {
    r.failure_kind = "ExpansionError";
    r.failure = e.what();
  } catch (const RewriteDivergence& e) {
    r.failure_kind = "RewriteDivergence";
    r.failure = e.what();
  } catch (const std::exception& e) {
    r.failure_kind = "InternalError";
    r.failure = e.what();
  }
  return r;
}

bool same_outcome(const EvalResult& a, const EvalResult& b) {
  if (a.ok() != b.ok()) return false;
  if (a.ok()) return *a.value == *b.value;
  return a.error->kind == b.error->kind && a.error->slot == b.error->slot;
}

}  // namespace

EquivalenceReport execution_equivalence(const std::vector<DatasetTurn>& turns,
                                        const FunctionRegistry& registry, const StubDb& fixture,
                                        const EquivalenceOptions& opts) {
  EquivalenceReport report;
  std::size_t i = 0;
  while (i < turns.size()) {
    DialogueContext legacy(registry, fixture, opts.clock);
    legacy.options.fallback_db = true;
    DialogueContext simple(registry, fixture, opts.clock);
    const std::string dialogue = turns[i].dialogue_id;
    for (; i < turns.size() && turns[i].dialogue_id == dialogue; ++i) {
      const DatasetTurn& t = turns[i];
      TurnVerdict v;
      v.turn_id = t.id();
      Run a = guarded([&] { return evaluate(build_graph(parse_sexp(t.original), legacy), legacy); });
      if (!t.simplified) {
        v.error_kind = "NotSimplified";
        v.detail = t.error.value_or("turn has no simplified form");
        report.verdicts.push_back(std::move(v));
        continue;
      }
      Run b = guarded([&] {
        Expr e = expand(parse_pexp(*t.simplified), registry, opts.expand_rules, opts.rewrite);
        return evaluate(build_graph(e, simple), simple);
      });
      std::string both = "original: " + describe(a) + "; simplified: " + describe(b);
      if (a.failure_kind || b.failure_kind) {
        v.error_kind = a.failure_kind ? *a.failure_kind : *b.failure_kind;
        v.detail = both;
      } else if (!same_outcome(a.result, b.result)) {
        v.kind = TurnVerdict::Kind::Differ;
        v.detail = both;
      } else if (!(legacy.db() == simple.db())) {
        v.kind = TurnVerdict::Kind::Differ;
        v.detail = both + "; database states differ";
      } else {
        v.kind = TurnVerdict::Kind::Equal;
        v.detail = describe(b);
      }
      report.verdicts.push_back(std::move(v));
    }
  }
  if (!report.verdicts.empty())
    report.match_rate = static_cast<double>(report.count(TurnVerdict::Kind::Equal)) /
                        static_cast<double>(report.verdicts.size());
  return report;
}

}  // namespace dflow
