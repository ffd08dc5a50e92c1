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

#ifndef DFLOW_DATASET_HPP_
#define DFLOW_DATASET_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dflow/db.hpp"
#include "dflow/registry.hpp"
#include "dflow/rewrite.hpp"
#include "dflow/value.hpp"

namespace dflow {

struct DatasetTurn {
  std::string dialogue_id;
  int turn_index = 0;
  std::string utterance;
  std::string original;                   // S-expression
  std::optional<std::string> simplified;  // call expression
  // Why simplification failed, when it did.
  std::optional<std::string> error;

  // "d01#0"
  std::string id() const { return dialogue_id + "#" + std::to_string(turn_index); }
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRecord : public std::runtime_error {
 public:
  MalformedRecord(std::size_t line, const std::string& why)
      : std::runtime_error("line " + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// One dialogue per line: {"dialogue_id": ..., "turns": [{"utterance": ...,
// "lispress": ..., "simplified": ...?}, ...]}. Blank lines are skipped.
// Throws MalformedRecord.
std::vector<DatasetTurn> parse_jsonl(std::string_view text);
// Throws IoError or MalformedRecord.
std::vector<DatasetTurn> load_jsonl(const std::string& path);

// Inverse of parse_jsonl; turns of one dialogue are grouped on one line in
// input order, with "simplified" added when present.
std::string to_jsonl(const std::vector<DatasetTurn>& turns);

struct SimplifySummary {
  std::size_t simplified = 0;
  std::size_t failed = 0;
};

// Rewrites every original to fixpoint and prints it in call syntax. Per-turn
// failures (syntax errors, divergence) are recorded on the turn.
SimplifySummary simplify_dataset(std::vector<DatasetTurn>& turns, const RuleSet& rules,
                                 const RewriteOptions& opts = {});

enum class Style { Original, Simplified };

const char* to_string(Style style);

struct LengthStats {
  Style style = Style::Original;
  std::vector<std::pair<double, std::size_t>> quantiles;  // q -> tokens
  std::size_t n = 0;

  std::size_t at(double q) const;
};

class EmptySample : public std::runtime_error {
 public:
  EmptySample() : std::runtime_error("no turns to measure") {}
};

// Nearest-rank quantile of an ascending sample: the element at rank
// ceil(q * n), clamped to [1, n].
std::size_t nearest_rank(const std::vector<std::size_t>& sorted, double q);

// Token lengths (tokenize_linear) of the requested style. Throws EmptySample,
// std::invalid_argument when a turn lacks that style or fails to parse.
LengthStats length_quantiles(const std::vector<DatasetTurn>& turns, Style style,
                             const std::vector<double>& qs);

struct TurnVerdict {
  enum class Kind { Equal, Differ, Error };

  std::string turn_id;
  Kind kind = Kind::Error;
  // For Error: the failure class, e.g. "SyntaxError" or "ExpansionError".
  std::string error_kind;
  std::string detail;

  // "equal", "differ", "error(SyntaxError)".
  std::string verdict() const;
};

struct EquivalenceReport {
  std::vector<TurnVerdict> verdicts;
  double match_rate = 0.0;

  std::size_t count(TurnVerdict::Kind kind) const;
  // One {"turn_id", "verdict", "detail"} object per line.
  std::string to_jsonl() const;
};

struct EquivalenceOptions {
  DateTime clock;
  // Expand-phase rules for the simplified pipeline.
  RuleSet expand_rules;
  RewriteOptions rewrite;
};

// Runs every dialogue twice on fresh copies of `fixture`: the originals with
// legacy functions and database fallback for refer, the simplified forms
// through expansion. A turn is equal when both leave the same database and
// produce the same root value, or raise the same exception kind for the same
// slot. Turns without a simplified form are reported as errors.
EquivalenceReport execution_equivalence(const std::vector<DatasetTurn>& turns,
                                        const FunctionRegistry& registry, const StubDb& fixture,
                                        const EquivalenceOptions& opts);

}  // namespace dflow

#endif  // DFLOW_DATASET_HPP_
