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

#include "dflow/expansion.hpp"

namespace dflow {

ExpansionError::ExpansionError(std::string function, std::string param, TypeTag actual)
    : std::runtime_error("TypeMismatch: " + function + "." + param + " cannot take " +
                         actual.str()),
      function_(std::move(function)),
      param_(std::move(param)),
      actual_(std::move(actual)) {}

namespace {

using Scope = std::vector<std::pair<std::string, TypeTag>>;

class Coercer {
 public:
  explicit Coercer(const FunctionRegistry& registry) : registry_(registry) {}

  Expr run(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Let: {
        Expr out = e;
        std::size_t mark = scope_.size();
        for (auto& [name, value] : out.named) {
          value = run(value);
          scope_.emplace_back(name, infer_type(value, registry_, &scope_));
        }
        out.let_body() = run(e.let_body());
        scope_.resize(mark);
        return out;
      }
      case ExprKind::Call:
        return run_call(e);
      default:
        return e;
    }
  }

 private:
  Expr run_call(const Expr& e) {
    const FunctionSpec* spec = registry_.find(e.name);
    if (!spec) throw BuildError(BuildError::Kind::UnknownFunction, "unknown function " + e.name);
    Expr out = e;
    for (auto& a : out.args) a = run(a);
    for (auto& [k, v] : out.named) v = run(v);
    for (const auto& [key, arg] : bind_arguments(*spec, out)) {
      const ParamSpec* p = spec->param(param_of(key));
      TypeTag actual = infer_type(*arg, registry_, &scope_);
      if (!p || p->accepts_tag(actual)) continue;
      const auto* chain = registry_.coercion(spec->name, p->name, actual);
      if (!chain) throw ExpansionError(spec->name, p->name, actual);
      Expr wrapped = *arg;
      for (const auto& fn : *chain) {
        Expr call = Expr::call(fn, {std::move(wrapped)});
        call.synthesized = true;
        call.span = arg->span;
        wrapped = std::move(call);
      }
      TypeTag now = infer_type(wrapped, registry_, &scope_);
      if (!p->accepts_tag(now)) throw ExpansionError(spec->name, p->name, actual);
      // bind_arguments hands back pointers into `out`.
      *const_cast<Expr*>(arg) = std::move(wrapped);
    }
    return out;
  }

  const FunctionRegistry& registry_;
  Scope scope_;
};

}  // namespace

Expr coerce_arguments(const Expr& e, const FunctionRegistry& registry) {
  return Coercer(registry).run(e);
}

Expr expand(const Expr& e, const FunctionRegistry& registry, const RuleSet& expand_rules,
            const RewriteOptions& opts) {
  return coerce_arguments(rewrite_fixpoint(e, expand_rules, opts), registry);
}

}  // namespace dflow
