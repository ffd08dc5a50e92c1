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

#include "dflow/registry.hpp"

#include <algorithm>

namespace dflow {

const char* to_string(BuildError::Kind kind) {
  switch (kind) {
    case BuildError::Kind::UnknownFunction: return "UnknownFunction";
    case BuildError::Kind::ArityMismatch: return "ArityMismatch";
    case BuildError::Kind::DuplicateNamedArg: return "DuplicateNamedArg";
    case BuildError::Kind::UnknownParameter: return "UnknownParameter";
    case BuildError::Kind::UnboundVariable: return "UnboundVariable";
    case BuildError::Kind::NotExecutable: return "NotExecutable";
    case BuildError::Kind::Cycle: return "Cycle";
    case BuildError::Kind::UnknownNode: return "UnknownNode";
  }
  return "?";
}

bool ParamSpec::accepts_tag(const TypeTag& actual) const {
  if (accepts.empty()) return true;
  return std::any_of(accepts.begin(), accepts.end(),
                     [&](const TypeTag& t) { return compatible(t, actual); });
}

const TypeTag* ArgTypes::find(std::string_view key) const {
  for (const auto& [k, t] : tags)
    if (k == key) return &t;
  return nullptr;
}

const ParamSpec* FunctionSpec::param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

void FunctionRegistry::add(FunctionSpec spec) {
  std::string name = spec.name;
  functions_.insert_or_assign(std::move(name), std::move(spec));
}

void FunctionRegistry::add_coercion(Coercion c) { coercions_.push_back(std::move(c)); }

const FunctionSpec* FunctionRegistry::find(std::string_view name) const {
  auto it = functions_.find(name);
  return it == functions_.end() ? nullptr : &it->second;
}

bool FunctionRegistry::is_effectful(std::string_view name) const {
  const FunctionSpec* spec = find(name);
  return spec && spec->effectful;
}

const std::vector<std::string>* FunctionRegistry::coercion(std::string_view function,
                                                           std::string_view param,
                                                           const TypeTag& actual) const {
  for (const auto& c : coercions_)
    if (c.function == function && c.param == param && c.actual == actual) return &c.chain;
  return nullptr;
}

std::vector<std::string> FunctionRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, spec] : functions_) out.push_back(name);
  return out;
}

std::string_view param_of(std::string_view input_key) {
  return input_key.substr(0, input_key.find('.'));
}

std::vector<std::pair<std::string, const Expr*>> bind_arguments(const FunctionSpec& spec,
                                                                const Expr& call) {
  std::vector<std::pair<std::string, const Expr*>> bound;
  const auto& params = spec.params;
  std::size_t pi = 0;
  for (std::size_t ai = 0; ai < call.args.size(); ++ai) {
    if (pi >= params.size()) {
      throw BuildError(BuildError::Kind::ArityMismatch,
                       spec.name + ": got " + std::to_string(call.args.size()) +
                           " positional arguments, expected at most " +
                           std::to_string(params.size()));
    }
    const ParamSpec& p = params[pi];
    if (p.variadic) {
      bound.emplace_back(p.name + "." + std::to_string(ai - pi), &call.args[ai]);
    } else {
      bound.emplace_back(p.name, &call.args[ai]);
      ++pi;
    }
  }
  for (const auto& [key, value] : call.named) {
    const ParamSpec* p = spec.param(key);
    if (!p || p->variadic)
      throw BuildError(BuildError::Kind::UnknownParameter, spec.name + " has no parameter '" + key + "'");
    bool taken = std::any_of(bound.begin(), bound.end(), [&](const auto& b) { return b.first == key; });
    if (taken)
      throw BuildError(BuildError::Kind::DuplicateNamedArg,
                       spec.name + ": parameter '" + key + "' given twice");
    bound.emplace_back(key, &value);
  }
  for (const auto& p : params) {
    if (!p.required) continue;
    bool present = std::any_of(bound.begin(), bound.end(),
                               [&](const auto& b) { return param_of(b.first) == p.name; });
    if (!present) {
      std::size_t required = std::count_if(params.begin(), params.end(),
                                           [](const ParamSpec& q) { return q.required; });
      throw BuildError(BuildError::Kind::ArityMismatch,
                       spec.name + ": missing argument '" + p.name + "' (got " +
                           std::to_string(call.args.size() + call.named.size()) + ", expected " +
                           std::to_string(required) + ")");
    }
  }
  // Declaration order keeps node inputs stable regardless of how the call
  // spelled them.
  std::stable_sort(bound.begin(), bound.end(), [&](const auto& a, const auto& b) {
    auto index = [&](std::string_view key) {
      for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i].name == param_of(key)) return i;
      return params.size();
    };
    return index(a.first) < index(b.first);
  });
  return bound;
}

TypeTag literal_tag(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Text:
    case ExprKind::Symbol: return TypeTag::Kind::Text;
    case ExprKind::Number: return e.is_integer() ? TypeTag::Kind::Int : TypeTag::Kind::Float;
    case ExprKind::Bool: return TypeTag::Kind::Bool;
    default: return TypeTag::Kind::Any;
  }
}

TypeTag infer_type(const Expr& e, const FunctionRegistry& registry,
                   std::vector<std::pair<std::string, TypeTag>>* scope) {
  switch (e.kind) {
    case ExprKind::Call: {
      const FunctionSpec* spec = registry.find(e.name);
      if (!spec) throw BuildError(BuildError::Kind::UnknownFunction, "unknown function " + e.name);
      ArgTypes args;
      args.call = &e;
      for (const auto& [key, arg] : bind_arguments(*spec, e))
        args.tags.emplace_back(key, infer_type(*arg, registry, scope));
      return spec->returns ? spec->returns(args) : TypeTag(TypeTag::Kind::Any);
    }
    case ExprKind::Let: {
      std::vector<std::pair<std::string, TypeTag>> local;
      if (!scope) scope = &local;
      std::size_t mark = scope->size();
      for (const auto& [name, value] : e.named) {
        TypeTag t = infer_type(value, registry, scope);
        scope->emplace_back(name, t);
      }
      TypeTag out = infer_type(e.let_body(), registry, scope);
      scope->resize(mark);
      return out;
    }
    case ExprKind::VarRef:
      if (scope) {
        for (auto it = scope->rbegin(); it != scope->rend(); ++it)
          if (it->first == e.name) return it->second;
      }
      throw BuildError(BuildError::Kind::UnboundVariable, "unbound variable " + e.name);
    case ExprKind::PatternVar:
    case ExprKind::SegmentVar:
    case ExprKind::Wildcard:
      throw BuildError(BuildError::Kind::NotExecutable, "pattern variable in executable expression");
    default:
      return literal_tag(e);
  }
}

}  // namespace dflow
