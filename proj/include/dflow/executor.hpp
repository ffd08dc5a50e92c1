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

#ifndef DFLOW_EXECUTOR_HPP_
#define DFLOW_EXECUTOR_HPP_

#include <exception>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dflow/graph.hpp"

namespace dflow {

// Thrown by function implementations and API-level searches; evaluate()
// converts it into a recorded EngineException.
class EngineError : public std::exception {
 public:
  explicit EngineError(EngineException e);
  const EngineException& info() const { return info_; }
  const char* what() const noexcept override { return what_.c_str(); }

 private:
  EngineException info_;
  std::string what_;
};

[[noreturn]] void raise(EngineException::Kind kind, std::string prompt,
                        std::optional<std::string> slot = std::nullopt,
                        std::optional<TypeTag> expected = std::nullopt);

// Evaluated inputs of one node, handed to its implementation.
class CallFrame {
 public:
  CallFrame(DialogueContext& ctx, NodeId id, std::vector<std::pair<std::string, Value>> args);

  DialogueContext& ctx() { return ctx_; }
  NodeId id() const { return id_; }
  const GraphNode& node() const { return ctx_.node(id_); }

  // nullptr when the input is absent.
  const Value* arg(std::string_view key) const;
  // Values of a variadic parameter in order.
  std::vector<const Value*> variadic(std::string_view param) const;
  const std::vector<std::pair<std::string, Value>>& args() const { return args_; }

  // Records `v` as a database-origin node in the current turn and links it as
  // this node's result node.
  NodeId materialize(const Value& v);
  // Links an existing node as this node's result node.
  void link_result(NodeId target);

 private:
  DialogueContext& ctx_;
  NodeId id_;
  std::vector<std::pair<std::string, Value>> args_;
};

struct EvalResult {
  std::optional<Value> value;
  std::optional<EngineException> error;
  bool ok() const { return value.has_value(); }
};

struct EvalOptions {
  // Push exceptions on ctx.exceptions() and their prompts on ctx.messages().
  bool record = true;
};

// Post-order evaluation with per-node result caching. Database writes made
// during a failed evaluation are rolled back.
EvalResult evaluate(NodeId root, DialogueContext& ctx, const EvalOptions& opts = {});

// Reads a declared field of an entity or scalar ("start", "name", "value").
// Empty when the field is unknown for the value's type or the entity is gone.
std::optional<Value> read_field(const Value& obj, std::string_view field, const StubDb& db);

// True if `value` (of runtime type `tag`) satisfies `c`. Entity fields are
// read from `db`; a reference to a deleted entity satisfies nothing but True.
bool satisfies(const Constraint& c, const Value& value, const StubDb& db);

// Field names valid in leaf predicates over `inner`.
bool valid_field(const TypeTag& inner, std::string_view field);

struct ReferOptions {
  bool fallback_db = false;
};

// Newest evaluated node (turns newest first, reverse creation order within a
// turn) whose tag and result satisfy `c`; with fallback_db a database hit is
// materialized as a fresh db node. Throws EngineError(NoMatch).
NodeId refer(const Constraint& c, DialogueContext& ctx, const ReferOptions& opts = {});

enum class ReviseMode { Replace, ExtendAnd };

struct TurnOutcome {
  NodeId root{};
  EvalResult result;
};

// Copies the turn graph holding the newest node matching `old_spec`,
// substitutes (or AND-extends) that node with `new_subexpr`, appends the copy
// as a new turn and evaluates it. Throws EngineError (NoMatch, TypeMismatch)
// before anything is appended.
TurnOutcome revise(const Constraint& old_spec, const Expr& new_subexpr, ReviseMode mode,
                   DialogueContext& ctx);

// Supplies the value missing for the pending MissingValue exception on top of
// the stack, re-running a copy of the suspended turn. Throws EngineError
// (TypeMismatch) or std::logic_error subclass NoPendingException.
class NoPendingException : public std::logic_error {
 public:
  NoPendingException() : std::logic_error("no pending exception to resume") {}
  explicit NoPendingException(const std::string& why) : std::logic_error(why) {}
};

TurnOutcome resume_exception(const Expr& value_expr, DialogueContext& ctx);

// Builds `e` outside any turn and evaluates it without recording; used for
// the old-value constraint of revise requests. Throws EngineError.
Value evaluate_scratch(const Expr& e, DialogueContext& ctx);

// Database rows satisfying `c` (events or persons by c.inner), ascending id.
std::vector<Value> query_db(const Constraint& c, const StubDb& db);

// Registers the domain-independent operators: AND, OR, NOT, singleton, size,
// get_attr, refer, of_type, value_is.
void register_core(FunctionRegistry& registry);

}  // namespace dflow

#endif  // DFLOW_EXECUTOR_HPP_
