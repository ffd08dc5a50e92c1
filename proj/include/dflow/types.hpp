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

#ifndef DFLOW_TYPES_HPP_
#define DFLOW_TYPES_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace dflow {

// Static type of a graph node. Constraint and SetOf wrap exactly one inner
// tag. Any only appears inside function signatures and in the type of
// EmptyStructConstraint-like values that constrain nothing.
class TypeTag {
 public:
  enum class Kind {
    Any,
    Event,
    Recipient,
    Date,
    Time,
    DateTime,
    Text,
    Int,
    Float,
    Bool,
    Constraint,
    SetOf,
    Unit,
  };

  TypeTag(Kind kind = Kind::Unit);  // NOLINT: implicit by design of the tag set

  static TypeTag constraint(TypeTag inner);
  static TypeTag set_of(TypeTag inner);

  Kind kind() const { return kind_; }
  bool has_inner() const { return inner_ != nullptr; }
  // Precondition: has_inner().
  const TypeTag& inner() const { return *inner_; }

  bool is_any() const { return kind_ == Kind::Any; }

  // "Event", "SetOf(Event)", "Constraint(Recipient)".
  std::string str() const;
  static std::optional<TypeTag> parse(std::string_view text);

  friend bool operator==(const TypeTag& a, const TypeTag& b);
  friend bool operator!=(const TypeTag& a, const TypeTag& b) { return !(a == b); }

 private:
  Kind kind_;
  std::shared_ptr<const TypeTag> inner_;
};

// True if a value of type `actual` may flow into a slot declared `expected`.
// Any on either side matches, recursively through Constraint/SetOf.
bool compatible(const TypeTag& expected, const TypeTag& actual);

// Least specific common tag for two compatible tags (Any yields to the other).
std::optional<TypeTag> unify(const TypeTag& a, const TypeTag& b);

}  // namespace dflow

#endif  // DFLOW_TYPES_HPP_
