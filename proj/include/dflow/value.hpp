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

#ifndef DFLOW_VALUE_HPP_
#define DFLOW_VALUE_HPP_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "dflow/types.hpp"

namespace dflow {

using EntityId = std::int64_t;

// All instants are wall-clock times in one fixed zone, minute resolution.
struct Date {
  std::chrono::sys_days day;
  friend bool operator==(const Date&, const Date&) = default;
};

struct TimeOfDay {
  int minutes = 0;  // since midnight
  friend bool operator==(const TimeOfDay&, const TimeOfDay&) = default;
};

struct DateTime {
  std::chrono::sys_time<std::chrono::minutes> instant;
  friend bool operator==(const DateTime&, const DateTime&) = default;
  friend auto operator<=>(const DateTime&, const DateTime&) = default;
  Date date() const;
  TimeOfDay time() const;
};

DateTime at(Date d, TimeOfDay t);
Date make_date(int year, unsigned month, unsigned day);

// "2022-01-02", "14:00", "2022-01-02T14:00:00Z".
std::string format_date(Date d);
std::string format_time(TimeOfDay t);
std::string format_datetime(DateTime dt);

// RFC 3339 date-time. Offsets are accepted syntactically and ignored: the
// engine works in a single fixed zone. Seconds must be zero.
std::optional<DateTime> parse_datetime(std::string_view text);
std::optional<Date> parse_date(std::string_view text);

enum class EntityKind { Event, Recipient };

struct EntityRef {
  EntityKind kind = EntityKind::Event;
  EntityId id = 0;
  friend bool operator==(const EntityRef&, const EntityRef&) = default;
};

// Set of entities of one kind, ids kept sorted and unique.
struct EntitySet {
  EntityKind kind = EntityKind::Event;
  std::vector<EntityId> ids;
  friend bool operator==(const EntitySet&, const EntitySet&) = default;
};

EntitySet make_set(EntityKind kind, std::vector<EntityId> ids);

struct Unit {
  friend bool operator==(const Unit&, const Unit&) = default;
};

struct Constraint;
using ConstraintPtr = std::shared_ptr<const Constraint>;

// Runtime value carried by a graph node.
class Value {
 public:
  using Storage = std::variant<Unit, bool, std::int64_t, double, std::string, Date,
                               TimeOfDay, DateTime, EntityRef, EntitySet, ConstraintPtr>;

  Value() = default;
  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Value>)
  Value(T v) : v_(std::move(v)) {}  // NOLINT: values convert implicitly

  const Storage& storage() const { return v_; }

  template <typename T>
  bool is() const { return std::holds_alternative<T>(v_); }
  template <typename T>
  const T& as() const { return std::get<T>(v_); }
  template <typename T>
  const T* get_if() const { return std::get_if<T>(&v_); }

  TypeTag tag() const;
  // Human-readable rendering used in messages and DOT labels.
  std::string str() const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

 private:
  Storage v_;
};

TypeTag tag_of(EntityKind kind);
const char* to_string(EntityKind kind);

// Side-effect-free predicate tree over objects of type `inner`.
struct Constraint {
  enum class Op { True, Leaf, And, Or, Not };

  Op op = Op::True;
  TypeTag inner = TypeTag::Kind::Any;
  // Leaf only.
  std::string field;
  Value operand;
  // And/Or: one or more children; Not: exactly one.
  std::vector<Constraint> children;

  static Constraint any(TypeTag inner);
  static Constraint leaf(TypeTag inner, std::string field, Value operand);
  static Constraint all_of(std::vector<Constraint> cs);
  static Constraint any_of(std::vector<Constraint> cs);
  static Constraint negate(Constraint c);

  std::string str() const;
  friend bool operator==(const Constraint& a, const Constraint& b);
};

ConstraintPtr share(Constraint c);

}  // namespace dflow

#endif  // DFLOW_VALUE_HPP_
