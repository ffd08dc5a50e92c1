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

#include "dflow/types.hpp"

#include <array>
#include <utility>

namespace dflow {

namespace {

constexpr std::array<std::pair<TypeTag::Kind, std::string_view>, 13> kNames = {{
    {TypeTag::Kind::Any, "Any"},
    {TypeTag::Kind::Event, "Event"},
    {TypeTag::Kind::Recipient, "Recipient"},
    {TypeTag::Kind::Date, "Date"},
    {TypeTag::Kind::Time, "Time"},
    {TypeTag::Kind::DateTime, "DateTime"},
    {TypeTag::Kind::Text, "Text"},
    {TypeTag::Kind::Int, "Int"},
    {TypeTag::Kind::Float, "Float"},
    {TypeTag::Kind::Bool, "Bool"},
    {TypeTag::Kind::Constraint, "Constraint"},
    {TypeTag::Kind::SetOf, "SetOf"},
    {TypeTag::Kind::Unit, "Unit"},
}};

}  // namespace

TypeTag::TypeTag(Kind kind) : kind_(kind) {
  if (kind == Kind::Constraint || kind == Kind::SetOf)
    inner_ = std::make_shared<const TypeTag>(Kind::Any);
}

TypeTag TypeTag::constraint(TypeTag inner) {
  TypeTag t(Kind::Constraint);
  t.inner_ = std::make_shared<const TypeTag>(std::move(inner));
  return t;
}

TypeTag TypeTag::set_of(TypeTag inner) {
  TypeTag t(Kind::SetOf);
  t.inner_ = std::make_shared<const TypeTag>(std::move(inner));
  return t;
}

std::string TypeTag::str() const {
  std::string out;
  for (const auto& [k, name] : kNames)
    if (k == kind_) out = std::string(name);
  if (inner_) out += "(" + inner_->str() + ")";
  return out;
}

std::optional<TypeTag> TypeTag::parse(std::string_view text) {
  auto open = text.find('(');
  std::string_view head = text.substr(0, open);
  std::optional<Kind> kind;
  for (const auto& [k, name] : kNames)
    if (name == head) kind = k;
  if (!kind) return std::nullopt;
  bool wraps = *kind == Kind::Constraint || *kind == Kind::SetOf;
  if (open == std::string_view::npos) {
    if (wraps) return std::nullopt;
    return TypeTag(*kind);
  }
  if (!wraps || text.back() != ')') return std::nullopt;
  auto inner = parse(text.substr(open + 1, text.size() - open - 2));
  if (!inner) return std::nullopt;
  return *kind == Kind::Constraint ? constraint(*inner) : set_of(*inner);
}

bool operator==(const TypeTag& a, const TypeTag& b) {
  if (a.kind_ != b.kind_) return false;
  if (!a.inner_ || !b.inner_) return a.inner_ == b.inner_;
  return *a.inner_ == *b.inner_;
}

bool compatible(const TypeTag& expected, const TypeTag& actual) {
  if (expected.is_any() || actual.is_any()) return true;
  if (expected.kind() != actual.kind()) return false;
  if (!expected.has_inner()) return true;
  return compatible(expected.inner(), actual.inner());
}

std::optional<TypeTag> unify(const TypeTag& a, const TypeTag& b) {
  if (a.is_any()) return b;
  if (b.is_any()) return a;
  if (a.kind() != b.kind()) return std::nullopt;
  if (!a.has_inner()) return a;
  auto inner = unify(a.inner(), b.inner());
  if (!inner) return std::nullopt;
  return a.kind() == TypeTag::Kind::Constraint ? TypeTag::constraint(*inner)
                                                : TypeTag::set_of(*inner);
}

}  // namespace dflow
