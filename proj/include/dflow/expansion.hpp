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

#ifndef DFLOW_EXPANSION_HPP_
#define DFLOW_EXPANSION_HPP_

#include <stdexcept>
#include <string>

#include "dflow/expr.hpp"
#include "dflow/registry.hpp"
#include "dflow/rewrite.hpp"
#include "dflow/types.hpp"

namespace dflow {

// An argument whose static type neither fits its parameter nor has an entry
// in the coercion table.
class ExpansionError : public std::runtime_error {
 public:
  ExpansionError(std::string function, std::string param, TypeTag actual);

  const std::string& function() const { return function_; }
  const std::string& param() const { return param_; }
  const TypeTag& actual() const { return actual_; }

 private:
  std::string function_;
  std::string param_;
  TypeTag actual_;
};

// Inserts the coercion chains the registry declares wherever an argument's
// static type does not fit its parameter. Inserted calls are flagged
// synthesized. Throws ExpansionError and BuildError.
Expr coerce_arguments(const Expr& e, const FunctionRegistry& registry);

// Expand-phase rules to fixpoint, then coerce_arguments.
Expr expand(const Expr& e, const FunctionRegistry& registry, const RuleSet& expand_rules,
            const RewriteOptions& opts = {});

}  // namespace dflow

#endif  // DFLOW_EXPANSION_HPP_
