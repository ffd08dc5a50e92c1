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

#ifndef DFLOW_REGISTRY_HPP_
#define DFLOW_REGISTRY_HPP_

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dflow/expr.hpp"
#include "dflow/types.hpp"
#include "dflow/value.hpp"

namespace dflow {

class CallFrame;

struct ParamSpec {
  std::string name;
  // Accepted tags; empty accepts anything.
  std::vector<TypeTag> accepts;
  bool required = true;
  // Only the last parameter may be variadic; it absorbs the remaining
  // positional arguments as inputs "name.0", "name.1", ...
  bool variadic = false;

  bool accepts_tag(const TypeTag& actual) const;
};

// Argument tags as bound to parameter input keys, plus the call expression
// when one is at hand (polymorphic signatures such as of_type read literals).
struct ArgTypes {
  std::vector<std::pair<std::string, TypeTag>> tags;
  const Expr* call = nullptr;

  const TypeTag* find(std::string_view key) const;
};

using ReturnTypeFn = std::function<TypeTag(const ArgTypes&)>;
using Impl = std::function<Value(CallFrame&)>;

struct FunctionSpec {
  std::string name;
  std::vector<ParamSpec> params;
  ReturnTypeFn returns;
  Impl impl;
  // Writes to the database; never inlined or duplicated by rewriting.
  bool effectful = false;
  // Reads the external database; its result is materialized as a db node.
  bool db_result = false;
  // Part of the original annotation vocabulary only.
  bool legacy = false;
  std::string doc;

  const ParamSpec* param(std::string_view name) const;
};

// (function, parameter, actual tag) -> functions to wrap around the argument,
// innermost first.
struct Coercion {
  std::string function;
  std::string param;
  TypeTag actual;
  std::vector<std::string> chain;
};

class BuildError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownFunction,
    ArityMismatch,
    DuplicateNamedArg,
    UnknownParameter,
    UnboundVariable,
    NotExecutable,
    Cycle,
    UnknownNode,
  };

  BuildError(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(BuildError::Kind kind);

// Read-only after construction; shared across contexts.
class FunctionRegistry {
 public:
  void add(FunctionSpec spec);
  void add_coercion(Coercion c);

  const FunctionSpec* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  bool is_effectful(std::string_view name) const;

  const std::vector<std::string>* coercion(std::string_view function, std::string_view param,
                                           const TypeTag& actual) const;
  const std::vector<Coercion>& coercions() const { return coercions_; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, FunctionSpec, std::less<>> functions_;
  std::vector<Coercion> coercions_;
};

// Maps a call's positional and named arguments onto declared parameters, in
// declaration order. Throws BuildError (ArityMismatch, DuplicateNamedArg,
// UnknownParameter).
std::vector<std::pair<std::string, const Expr*>> bind_arguments(const FunctionSpec& spec,
                                                                const Expr& call);

// Parameter name for an input key ("constraints.2" -> "constraints").
std::string_view param_of(std::string_view input_key);

// Literal kinds map to Text (strings and bare symbols), Int, Float and Bool.
TypeTag literal_tag(const Expr& e);

// Static result type of an expression; let-bound names resolve through
// `scope`. Throws BuildError for unknown functions or bad arity.
TypeTag infer_type(const Expr& e, const FunctionRegistry& registry,
                   std::vector<std::pair<std::string, TypeTag>>* scope = nullptr);

}  // namespace dflow

#endif  // DFLOW_REGISTRY_HPP_
