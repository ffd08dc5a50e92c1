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

#include "dflow/calendar.hpp"

#include <algorithm>
#include <cstdlib>

#include "dflow/executor.hpp"

namespace dflow {

namespace {

using K = TypeTag::Kind;
using EK = EngineException::Kind;

// Fluent FunctionSpec construction.
class Fn {
 public:
  explicit Fn(std::string name) { s_.name = std::move(name); }

  Fn& param(std::string name, std::vector<TypeTag> accepts, bool required = true) {
    s_.params.push_back(ParamSpec{std::move(name), std::move(accepts), required, false});
    return *this;
  }
  Fn& returns(TypeTag t) {
    s_.returns = [t](const ArgTypes&) { return t; };
    return *this;
  }
  Fn& returns(ReturnTypeFn f) {
    s_.returns = std::move(f);
    return *this;
  }
  // Return type equal to the static type of one argument.
  Fn& returns_arg(std::string key) {
    s_.returns = [key](const ArgTypes& a) {
      const TypeTag* t = a.find(key);
      return t ? *t : TypeTag(K::Any);
    };
    return *this;
  }
  Fn& impl(Impl f) {
    s_.impl = std::move(f);
    return *this;
  }
  Fn& effectful() {
    s_.effectful = true;
    return *this;
  }
  Fn& db() {
    s_.db_result = true;
    return *this;
  }
  Fn& legacy() {
    s_.legacy = true;
    return *this;
  }
  Fn& doc(std::string d) {
    s_.doc = std::move(d);
    return *this;
  }
  FunctionSpec done() { return std::move(s_); }

 private:
  FunctionSpec s_;
};

TypeTag constraint_of(K k) { return TypeTag::constraint(k); }

const Value& in(const CallFrame& f, std::string_view key) {
  const Value* v = f.arg(key);
  if (!v) throw std::logic_error("missing input " + std::string(key));
  return *v;
}

const Constraint& constraint_in(const CallFrame& f, std::string_view key) {
  return *in(f, key).as<ConstraintPtr>();
}

Value recipient(EntityId id) { return EntityRef{EntityKind::Recipient, id}; }
Value event_ref(EntityId id) { return EntityRef{EntityKind::Event, id}; }

const Event& live_event(const CallFrame& f, const Value& v) {
  EntityId id = v.as<EntityRef>().id;
  const Event* e = const_cast<CallFrame&>(f).ctx().db().event(id);
  if (!e) raise(EK::NoMatch, "Event " + std::to_string(id) + " no longer exists.");
  return *e;
}

const Person& live_person(const CallFrame& f, const Value& v) {
  EntityId id = v.as<EntityRef>().id;
  const Person* p = const_cast<CallFrame&>(f).ctx().db().person(id);
  if (!p) raise(EK::NoMatch, "Person " + std::to_string(id) + " does not exist.");
  return *p;
}

std::string describe(const Event& e) {
  return "event " + std::to_string(e.id) + " \"" + e.subject + "\" on " +
         format_date(e.start.date()) + " " + format_time(e.start.time()) + "-" +
         format_time(e.end.time());
}

Value delete_by_id(CallFrame& f, EntityId id) {
  StubDb& db = f.ctx().db();
  // Preflight: the id must name an existing event.
  const Event* e = db.event(id);
  if (!e) raise(EK::NoMatch, "There is no event with id " + std::to_string(id) + ".");
  std::string what = describe(*e);
  // Commit.
  db.remove_event(id);
  f.ctx().messages().push_back("Deleted " + what + ".");
  return Unit{};
}

Value find_events(CallFrame& f, const Constraint& c) {
  std::vector<EntityId> ids;
  for (const auto& v : query_db(c, f.ctx().db())) ids.push_back(v.as<EntityRef>().id);
  Value out = make_set(EntityKind::Event, std::move(ids));
  f.materialize(out);
  return out;
}

// Slots of an event to be created, gathered from named inputs and from the
// conjunctive leaves of a constraint.
struct Draft {
  std::optional<std::string> subject;
  std::optional<DateTime> start;
  std::optional<Date> date;
  std::optional<DateTime> end;
  std::vector<EntityId> attendees;
};

template <typename T>
void set_once(std::optional<T>& slot, const T& v, const char* name) {
  if (slot && !(*slot == v))
    raise(EK::DomainError, std::string("Conflicting values given for the event ") + name + ".");
  slot = v;
}

void absorb(const Constraint& c, Draft& d) {
  switch (c.op) {
    case Constraint::Op::True:
      return;
    case Constraint::Op::And:
      for (const auto& k : c.children) absorb(k, d);
      return;
    case Constraint::Op::Or:
    case Constraint::Op::Not:
      raise(EK::DomainError, "Cannot create an event from a disjunctive or negated description.");
    case Constraint::Op::Leaf:
      break;
  }
  if (c.field == "subject") {
    set_once(d.subject, c.operand.as<std::string>(), "subject");
  } else if (c.field == "start") {
    set_once(d.start, c.operand.as<DateTime>(), "start");
  } else if (c.field == "start_date") {
    set_once(d.date, c.operand.as<Date>(), "date");
  } else if (c.field == "end") {
    set_once(d.end, c.operand.as<DateTime>(), "end");
  } else if (c.field == "attendee") {
    d.attendees.push_back(c.operand.as<EntityRef>().id);
  } else {
    raise(EK::DomainError, "Cannot create an event constrained on " + c.field + ".");
  }
}

Draft draft_from(const CallFrame& f) {
  Draft d;
  if (const Value* c = f.arg("constraint")) absorb(*c->as<ConstraintPtr>(), d);
  if (const Value* v = f.arg("subject")) set_once(d.subject, v->as<std::string>(), "subject");
  if (const Value* v = f.arg("start")) set_once(d.start, v->as<DateTime>(), "start");
  if (const Value* v = f.arg("end")) set_once(d.end, v->as<DateTime>(), "end");
  return d;
}

// Preflight: every required slot present and consistent.
Event validate(const Draft& d) {
  if (!d.subject || d.subject->empty())
    raise(EK::MissingValue, "What should the new event be called?", "subject", TypeTag(K::Text));
  if (!d.start) {
    std::string prompt = d.date ? "What time on " + format_date(*d.date) + " should it start?"
                                : "When should the new event start?";
    raise(EK::MissingValue, prompt, "start", TypeTag(K::DateTime));
  }
  if (d.date && !(d.start->date() == *d.date))
    raise(EK::DomainError, "The start time is not on the requested date.");
  Event e;
  e.subject = *d.subject;
  e.start = *d.start;
  e.end = d.end ? *d.end : DateTime{d.start->instant + std::chrono::minutes(60)};
  if (!(e.start < e.end)) raise(EK::DomainError, "An event must start before it ends.");
  e.attendees = d.attendees;
  std::sort(e.attendees.begin(), e.attendees.end());
  e.attendees.erase(std::unique(e.attendees.begin(), e.attendees.end()), e.attendees.end());
  return e;
}

Value commit(CallFrame& f, Event e) {
  EntityId id = 0;
  try {
    id = f.ctx().db().insert_event(std::move(e));
  } catch (const FixtureError& err) {
    raise(EK::DomainError, err.what());
  }
  f.ctx().messages().push_back("Created " + describe(*f.ctx().db().event(id)) + ".");
  return event_ref(id);
}

// Draft slots as a constraint, the value handed from the legacy preflight
// step to its commit step.
Constraint draft_constraint(const Event& e) {
  std::vector<Constraint> leaves{Constraint::leaf(K::Event, "subject", e.subject),
                                 Constraint::leaf(K::Event, "start", e.start),
                                 Constraint::leaf(K::Event, "end", e.end)};
  for (EntityId a : e.attendees) leaves.push_back(Constraint::leaf(K::Event, "attendee", recipient(a)));
  return Constraint::all_of(std::move(leaves));
}

Date clock_date(CallFrame& f) { return f.ctx().clock().date(); }

Date add_days(Date d, int n) { return Date{d.day + std::chrono::days(n)}; }

Value hour_of(const Value& n, bool pm) {
  std::int64_t h = n.as<std::int64_t>();
  if (h < 1 || h > 12) raise(EK::DomainError, std::to_string(h) + " is not a clock hour.");
  int hour = static_cast<int>(h % 12) + (pm ? 12 : 0);
  return TimeOfDay{hour * 60};
}

Value starts_at(const Value& when) {
  if (const auto* d = when.get_if<Date>()) return share(Constraint::leaf(K::Event, "start_date", *d));
  return share(Constraint::leaf(K::Event, "start", when.as<DateTime>()));
}

ReturnTypeFn type_argument(std::string key) {
  return [key](const ArgTypes& a) {
    if (a.call) {
      const Expr* lit = a.call->find_named(key);
      if (!lit && !a.call->args.empty()) lit = &a.call->args[0];
      if (lit && lit->is_literal())
        if (auto t = TypeTag::parse(lit->name)) return TypeTag::constraint(*t);
    }
    return TypeTag::constraint(K::Any);
  };
}

}  // namespace

void register_calendar(FunctionRegistry& r) {
  const TypeTag text = K::Text, date = K::Date, datetime = K::DateTime, time = K::Time;
  const TypeTag event = K::Event, person = K::Recipient, integer = K::Int;
  const TypeTag event_c = constraint_of(K::Event);

  r.add(Fn("FindPerson")
            .param("name", {text})
            .returns(person)
            .db()
            .impl([](CallFrame& f) -> Value {
              const auto& name = in(f, "name").as<std::string>();
              auto found = f.ctx().db().persons_named(name);
              if (found.empty()) raise(EK::NoMatch, "I couldn't find anyone named " + name + ".");
              if (found.size() > 1)
                raise(EK::MultipleMatches, std::to_string(found.size()) +
                                               " people are named " + name + "; which one?");
              Value v = recipient(found.front()->id);
              f.materialize(v);
              return v;
            })
            .doc("Person with exactly this name (case-insensitive).")
            .done());
  r.add(Fn("FindManager")
            .param("person", {person})
            .returns(person)
            .db()
            .impl([](CallFrame& f) -> Value {
              const Person& p = live_person(f, in(f, "person"));
              if (!p.manager_id) raise(EK::DomainError, p.name + " has no manager.");
              Value v = recipient(*p.manager_id);
              f.materialize(v);
              return v;
            })
            .doc("Manager of a person.")
            .done());
  r.add(Fn("FindEvents")
            .param("constraint", {event_c})
            .returns(TypeTag::set_of(K::Event))
            .db()
            .impl([](CallFrame& f) { return find_events(f, constraint_in(f, "constraint")); })
            .doc("All events satisfying a constraint.")
            .done());
  r.add(Fn("DeleteEvent")
            .param("target", {integer})
            .returns(K::Unit)
            .effectful()
            .impl([](CallFrame& f) { return delete_by_id(f, in(f, "target").as<std::int64_t>()); })
            .doc("Validates and removes one event.")
            .done());
  r.add(Fn("CreateEvent")
            .param("constraint", {event_c}, false)
            .param("subject", {text}, false)
            .param("start", {datetime}, false)
            .param("end", {datetime}, false)
            .returns(event)
            .effectful()
            .impl([](CallFrame& f) { return commit(f, validate(draft_from(f))); })
            .doc("Validates the event description, then inserts it.")
            .done());

  r.add(Fn("Today").returns(date).impl([](CallFrame& f) -> Value { return clock_date(f); }).done());
  r.add(Fn("Tomorrow")
            .returns(date)
            .impl([](CallFrame& f) -> Value { return add_days(clock_date(f), 1); })
            .done());
  r.add(Fn("Yesterday")
            .returns(date)
            .impl([](CallFrame& f) -> Value { return add_days(clock_date(f), -1); })
            .done());
  r.add(Fn("NextWeek")
            .returns(date)
            .impl([](CallFrame& f) -> Value { return add_days(clock_date(f), 7); })
            .doc("The clock date plus seven days.")
            .done());
  r.add(Fn("DateAtTime")
            .param("date", {date})
            .param("time", {time})
            .returns(datetime)
            .impl([](CallFrame& f) -> Value {
              return at(in(f, "date").as<Date>(), in(f, "time").as<TimeOfDay>());
            })
            .done());
  r.add(Fn("NumberPM")
            .param("number", {integer})
            .returns(time)
            .impl([](CallFrame& f) { return hour_of(in(f, "number"), true); })
            .done());
  r.add(Fn("NumberAM")
            .param("number", {integer})
            .returns(time)
            .impl([](CallFrame& f) { return hour_of(in(f, "number"), false); })
            .done());

  r.add(Fn("starts_at")
            .param("when", {date, datetime})
            .returns(event_c)
            .impl([](CallFrame& f) { return starts_at(in(f, "when")); })
            .doc("Events starting on a date or at an instant.")
            .done());
  r.add(Fn("with_attendee")
            .param("person", {person})
            .returns(event_c)
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::leaf(K::Event, "attendee", in(f, "person")));
            })
            .done());
  r.add(Fn("has_subject")
            .param("subject", {text})
            .returns(event_c)
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::leaf(K::Event, "subject", in(f, "subject")));
            })
            .done());
  r.add(Fn("has_name")
            .param("name", {text})
            .returns(constraint_of(K::Recipient))
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::leaf(K::Recipient, "name", in(f, "name")));
            })
            .done());

  struct Attr {
    const char* function;
    TypeTag owner;
    const char* field;
    TypeTag result;
  };
  const Attr attrs[] = {
      {"Event.id", event, "id", integer},          {"Event.subject", event, "subject", text},
      {"Event.start", event, "start", datetime},   {"Event.end", event, "end", datetime},
      {"Recipient.name", person, "name", text},
  };
  for (const auto& a : attrs) {
    std::string field = a.field;
    r.add(Fn(a.function)
              .param("obj", {a.owner})
              .returns(a.result)
              .impl([field](CallFrame& f) -> Value {
                auto v = read_field(in(f, "obj"), field, f.ctx().db());
                if (!v) raise(EK::NoMatch, "That " + in(f, "obj").tag().str() + " no longer exists.");
                return *v;
              })
              .done());
  }
}

void register_legacy(FunctionRegistry& r) {
  const TypeTag text = K::Text, date = K::Date, datetime = K::DateTime, time = K::Time;
  const TypeTag event = K::Event, person = K::Recipient, integer = K::Int;
  const TypeTag event_c = constraint_of(K::Event);
  const TypeTag any_c = constraint_of(K::Any);

  for (const char* name : {"Yield", "Execute"}) {
    const char* key = std::string_view(name) == "Yield" ? "output" : "intension";
    r.add(Fn(name)
              .param(key, {})
              .returns_arg(key)
              .legacy()
              .impl([key](CallFrame& f) { return in(f, key); })
              .done());
  }
  r.add(Fn("extensionConstraint")
            .param("constraint", {any_c})
            .returns_arg("constraint")
            .legacy()
            .impl([](CallFrame& f) { return in(f, "constraint"); })
            .done());
  r.add(Fn("EmptyStructConstraint")
            .param("type", {text}, false)
            .returns(type_argument("type"))
            .legacy()
            .impl([](CallFrame& f) -> Value {
              TypeTag inner = K::Any;
              if (const Value* t = f.arg("type")) {
                auto parsed = TypeTag::parse(t->as<std::string>());
                if (!parsed) raise(EK::DomainError, "unknown type " + t->as<std::string>());
                inner = *parsed;
              }
              return share(Constraint::any(inner));
            })
            .doc("Constraint satisfied by everything (of one type when given).")
            .done());
  r.add(Fn("PersonName.apply")
            .param("name", {text})
            .returns(text)
            .legacy()
            .impl([](CallFrame& f) { return in(f, "name"); })
            .done());
  r.add(Fn("RecipientWithNameLike")
            .param("constraint", {constraint_of(K::Recipient)})
            .param("name", {text})
            .returns(constraint_of(K::Recipient))
            .legacy()
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::all_of(
                  {constraint_in(f, "constraint"),
                   Constraint::leaf(K::Recipient, "name", in(f, "name"))}));
            })
            .done());
  r.add(Fn("DeletePreflightEventWrapper")
            .param("id", {integer})
            .returns(event)
            .legacy()
            .impl([](CallFrame& f) -> Value {
              EntityId id = in(f, "id").as<std::int64_t>();
              if (!f.ctx().db().event(id))
                raise(EK::NoMatch, "There is no event with id " + std::to_string(id) + ".");
              return event_ref(id);
            })
            .done());
  r.add(Fn("DeleteCommitEventWrapper")
            .param("event", {event})
            .returns(K::Unit)
            .effectful()
            .legacy()
            .impl([](CallFrame& f) {
              return delete_by_id(f, in(f, "event").as<EntityRef>().id);
            })
            .done());
  r.add(Fn("CreatePreflightEventWrapper")
            .param("constraint", {event_c}, false)
            .param("subject", {text}, false)
            .param("start", {datetime}, false)
            .param("end", {datetime}, false)
            .returns(event_c)
            .legacy()
            .impl([](CallFrame& f) -> Value { return share(draft_constraint(validate(draft_from(f)))); })
            .done());
  r.add(Fn("CreateCommitEventWrapper")
            .param("constraint", {event_c})
            .returns(event)
            .effectful()
            .legacy()
            .impl([](CallFrame& f) { return commit(f, validate(draft_from(f))); })
            .done());
  r.add(Fn("FindEventWrapperWithDefaults")
            .param("constraint", {event_c})
            .returns(TypeTag::set_of(K::Event))
            .db()
            .legacy()
            .impl([](CallFrame& f) { return find_events(f, constraint_in(f, "constraint")); })
            .done());
  r.add(Fn("QueryEventResponse.results")
            .param("response", {TypeTag::set_of(K::Event)})
            .returns(TypeTag::set_of(K::Event))
            .legacy()
            .impl([](CallFrame& f) { return in(f, "response"); })
            .done());
  r.add(Fn("EventOnDate")
            .param("date", {date})
            .param("event", {event_c})
            .returns(event_c)
            .legacy()
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::all_of(
                  {Constraint::leaf(K::Event, "start_date", in(f, "date")),
                   constraint_in(f, "event")}));
            })
            .done());
  r.add(Fn("EventOnDateTime")
            .param("dateTime", {datetime})
            .param("event", {event_c})
            .returns(event_c)
            .legacy()
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::all_of(
                  {Constraint::leaf(K::Event, "start", in(f, "dateTime")),
                   constraint_in(f, "event")}));
            })
            .done());
  r.add(Fn("DateAtTimeWithDefaults")
            .param("date", {date})
            .param("time", {time})
            .returns(datetime)
            .legacy()
            .impl([](CallFrame& f) -> Value {
              return at(in(f, "date").as<Date>(), in(f, "time").as<TimeOfDay>());
            })
            .done());
  r.add(Fn("Event.withAttendees")
            .param("constraint", {event_c})
            .returns(event_c)
            .legacy()
            .impl([](CallFrame& f) { return in(f, "constraint"); })
            .done());
  r.add(Fn("AttendeeListHasRecipient")
            .param("recipient", {person})
            .returns(event_c)
            .legacy()
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::leaf(K::Event, "attendee", in(f, "recipient")));
            })
            .done());
  r.add(Fn("StringEquals")
            .param("value", {text})
            .returns(constraint_of(K::Text))
            .legacy()
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::leaf(K::Text, "value", in(f, "value")));
            })
            .done());
  r.add(Fn("Event.withSubject")
            .param("subject", {constraint_of(K::Text)})
            .returns(event_c)
            .legacy()
            .impl([](CallFrame& f) -> Value {
              const Constraint& c = constraint_in(f, "subject");
              if (c.op != Constraint::Op::Leaf || c.field != "value")
                raise(EK::DomainError, "Only exact subjects are supported.");
              return share(Constraint::leaf(K::Event, "subject", c.operand));
            })
            .done());
  r.add(Fn("andConstraint")
            .param("c1", {any_c})
            .param("c2", {any_c})
            .returns([](const ArgTypes& a) {
              const TypeTag* x = a.find("c1");
              const TypeTag* y = a.find("c2");
              if (x && y)
                if (auto u = unify(*x, *y)) return *u;
              return TypeTag::constraint(K::Any);
            })
            .legacy()
            .impl([](CallFrame& f) -> Value {
              return share(Constraint::all_of({constraint_in(f, "c1"), constraint_in(f, "c2")}));
            })
            .done());
}

void register_coercions(FunctionRegistry& r) {
  const TypeTag text = K::Text, event = K::Event;
  const TypeTag events = TypeTag::set_of(K::Event), event_c = constraint_of(K::Event);
  auto add = [&](const char* fn, const char* param, TypeTag actual, std::vector<std::string> chain) {
    r.add_coercion(Coercion{fn, param, std::move(actual), std::move(chain)});
  };
  add("DeleteEvent", "target", event, {"Event.id"});
  add("DeleteEvent", "target", events, {"singleton", "Event.id"});
  add("DeleteEvent", "target", event_c, {"FindEvents", "singleton", "Event.id"});
  for (const char* fn : {"Event.id", "Event.subject", "Event.start", "Event.end"}) {
    add(fn, "obj", events, {"singleton"});
    add(fn, "obj", event_c, {"FindEvents", "singleton"});
  }
  add("singleton", "set", event_c, {"FindEvents"});
  add("size", "set", event_c, {"FindEvents"});
  add("FindManager", "person", text, {"FindPerson"});
  add("with_attendee", "person", text, {"FindPerson"});
  add("Recipient.name", "obj", text, {"FindPerson"});
}

FunctionRegistry make_default_registry() {
  FunctionRegistry r;
  register_core(r);
  register_calendar(r);
  register_legacy(r);
  register_coercions(r);
  return r;
}

DateTime default_clock() { return at(make_date(2022, 1, 1), TimeOfDay{9 * 60}); }

std::string default_data_dir() {
  if (const char* env = std::getenv("DFLOW_DATA_DIR"); env && *env) return env;
#ifdef DFLOW_DATA_DIR
  return DFLOW_DATA_DIR;
#else
  return "data";
#endif
}

std::string default_fixture_path() {
  if (const char* env = std::getenv("DFLOW_FIXTURE"); env && *env) return env;
  return default_data_dir() + "/fixture.json";
}

}  // namespace dflow
