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

#include "dflow/value.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "dflow/expr.hpp"

namespace dflow {

using namespace std::chrono;

Date DateTime::date() const { return Date{floor<days>(instant)}; }

TimeOfDay DateTime::time() const {
  auto since = instant - floor<days>(instant);
  return TimeOfDay{static_cast<int>(since.count())};
}

DateTime at(Date d, TimeOfDay t) {
  return DateTime{sys_time<minutes>(d.day) + minutes(t.minutes)};
}

Date make_date(int year, unsigned month, unsigned day) {
  return Date{sys_days(std::chrono::year(year) / std::chrono::month(month) / std::chrono::day(day))};
}

std::string format_date(Date d) {
  year_month_day ymd(d.day);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time(TimeOfDay t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", t.minutes / 60, t.minutes % 60);
  return buf;
}

std::string format_datetime(DateTime dt) {
  return format_date(dt.date()) + "T" + format_time(dt.time()) + ":00Z";
}

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  return true;
}

}  // namespace

std::optional<Date> parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!read_digits(s, 0, 4, y) || !read_digits(s, 5, 2, m) || !read_digits(s, 8, 2, d))
    return std::nullopt;
  year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                     std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok()) return std::nullopt;
  return Date{sys_days(ymd)};
}

std::optional<DateTime> parse_datetime(std::string_view s) {
  if (s.size() < 16 || (s[10] != 'T' && s[10] != 't' && s[10] != ' ')) return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  int hh = 0, mm = 0, ss = 0;
  if (!date || s[13] != ':' || !read_digits(s, 11, 2, hh) || !read_digits(s, 14, 2, mm))
    return std::nullopt;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!read_digits(s, pos + 1, 2, ss)) return std::nullopt;
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
  }
  if (hh > 23 || mm > 59 || ss != 0) return std::nullopt;
  std::string_view zone = s.substr(pos);
  if (!(zone.empty() || zone == "Z" || zone == "z")) {
    int oh = 0, om = 0;
    if (zone.size() != 6 || (zone[0] != '+' && zone[0] != '-') || zone[3] != ':' ||
        !read_digits(zone, 1, 2, oh) || !read_digits(zone, 4, 2, om))
      return std::nullopt;
  }
  return at(*date, TimeOfDay{hh * 60 + mm});
}

EntitySet make_set(EntityKind kind, std::vector<EntityId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return EntitySet{kind, std::move(ids)};
}

TypeTag tag_of(EntityKind kind) {
  return kind == EntityKind::Event ? TypeTag::Kind::Event : TypeTag::Kind::Recipient;
}

const char* to_string(EntityKind kind) {
  return kind == EntityKind::Event ? "Event" : "Recipient";
}

TypeTag Value::tag() const {
  struct Visitor {
    TypeTag operator()(const Unit&) const { return TypeTag::Kind::Unit; }
    TypeTag operator()(bool) const { return TypeTag::Kind::Bool; }
    TypeTag operator()(std::int64_t) const { return TypeTag::Kind::Int; }
    TypeTag operator()(double) const { return TypeTag::Kind::Float; }
    TypeTag operator()(const std::string&) const { return TypeTag::Kind::Text; }
    TypeTag operator()(const Date&) const { return TypeTag::Kind::Date; }
    TypeTag operator()(const TimeOfDay&) const { return TypeTag::Kind::Time; }
    TypeTag operator()(const DateTime&) const { return TypeTag::Kind::DateTime; }
    TypeTag operator()(const EntityRef& e) const { return tag_of(e.kind); }
    TypeTag operator()(const EntitySet& s) const { return TypeTag::set_of(tag_of(s.kind)); }
    TypeTag operator()(const ConstraintPtr& c) const { return TypeTag::constraint(c->inner); }
  };
  return std::visit(Visitor{}, v_);
}

std::string Value::str() const {
  struct Visitor {
    std::string operator()(const Unit&) const { return "()"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      std::ostringstream os;
      os << d;
      return os.str();
    }
    std::string operator()(const std::string& s) const { return quote_text(s); }
    std::string operator()(const Date& d) const { return format_date(d); }
    std::string operator()(const TimeOfDay& t) const { return format_time(t); }
    std::string operator()(const DateTime& dt) const { return format_datetime(dt); }
    std::string operator()(const EntityRef& e) const {
      return std::string(to_string(e.kind)) + "#" + std::to_string(e.id);
    }
    std::string operator()(const EntitySet& s) const {
      std::string out = std::string("{") ;
      for (std::size_t i = 0; i < s.ids.size(); ++i) {
        if (i) out += ", ";
        out += std::string(to_string(s.kind)) + "#" + std::to_string(s.ids[i]);
      }
      return out + "}";
    }
    std::string operator()(const ConstraintPtr& c) const { return c->str(); }
  };
  return std::visit(Visitor{}, v_);
}

bool operator==(const Value& a, const Value& b) {
  if (a.v_.index() != b.v_.index()) return false;
  if (auto ca = a.get_if<ConstraintPtr>()) {
    const auto& cb = b.as<ConstraintPtr>();
    if (!*ca || !cb) return *ca == cb;
    return **ca == *cb;
  }
  return a.v_ == b.v_;
}

Constraint Constraint::any(TypeTag inner) {
  Constraint c;
  c.op = Op::True;
  c.inner = std::move(inner);
  return c;
}

Constraint Constraint::leaf(TypeTag inner, std::string field, Value operand) {
  Constraint c;
  c.op = Op::Leaf;
  c.inner = std::move(inner);
  c.field = std::move(field);
  c.operand = std::move(operand);
  return c;
}

namespace {

Constraint combine(Constraint::Op op, std::vector<Constraint> cs) {
  if (cs.empty()) throw std::invalid_argument("constraint combinator needs at least one operand");
  TypeTag inner = TypeTag::Kind::Any;
  for (const auto& c : cs) {
    auto u = unify(inner, c.inner);
    if (!u)
      throw std::invalid_argument("cannot combine constraints over " + inner.str() + " and " +
                                  c.inner.str());
    inner = *u;
  }
  Constraint out;
  out.op = op;
  out.inner = inner;
  out.children = std::move(cs);
  return out;
}

}  // namespace

Constraint Constraint::all_of(std::vector<Constraint> cs) { return combine(Op::And, std::move(cs)); }

Constraint Constraint::any_of(std::vector<Constraint> cs) { return combine(Op::Or, std::move(cs)); }

Constraint Constraint::negate(Constraint c) {
  Constraint out;
  out.op = Op::Not;
  out.inner = c.inner;
  out.children.push_back(std::move(c));
  return out;
}

std::string Constraint::str() const {
  switch (op) {
    case Op::True: return inner.str() + "?";
    case Op::Leaf: return field + "=" + operand.str();
    case Op::Not: return "NOT(" + children.front().str() + ")";
    case Op::And:
    case Op::Or: {
      std::string out = op == Op::And ? "AND(" : "OR(";
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out += ", ";
        out += children[i].str();
      }
      return out + ")";
    }
  }
  return "?";
}

bool operator==(const Constraint& a, const Constraint& b) {
  return a.op == b.op && a.inner == b.inner && a.field == b.field && a.operand == b.operand &&
         a.children == b.children;
}

ConstraintPtr share(Constraint c) { return std::make_shared<const Constraint>(std::move(c)); }

}  // namespace dflow
