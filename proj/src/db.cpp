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

#include "dflow/db.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"

namespace dflow {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

StubDb StubDb::parse(std::string_view json_text) {
  json_io::json doc;
  try {
    doc = json_io::json::parse(json_text);
  } catch (const json_io::json::exception& e) {
    throw FixtureError(std::string("fixture is not valid JSON: ") + e.what());
  }
  return json_io::decode_db(doc);
}

StubDb StubDb::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FixtureError("cannot open fixture " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string StubDb::dump() const { return json_io::encode(*this).dump(2); }

const Person* StubDb::person(EntityId id) const {
  auto it = std::find_if(persons_.begin(), persons_.end(), [&](const Person& p) { return p.id == id; });
  return it == persons_.end() ? nullptr : &*it;
}

const Event* StubDb::event(EntityId id) const {
  auto it = std::find_if(events_.begin(), events_.end(), [&](const Event& e) { return e.id == id; });
  return it == events_.end() ? nullptr : &*it;
}

std::vector<const Person*> StubDb::persons_named(std::string_view name) const {
  std::vector<const Person*> out;
  for (const auto& p : persons_)
    if (iequals(p.name, name)) out.push_back(&p);
  return out;
}

StubDb StubDb::from_rows(std::vector<Person> persons, std::vector<Event> events,
                         std::optional<EntityId> next_id) {
  StubDb db;
  EntityId max_id = 0;
  for (const auto& p : persons) max_id = std::max(max_id, p.id);
  for (auto& e : events) {
    max_id = std::max(max_id, e.id);
    std::sort(e.attendees.begin(), e.attendees.end());
    e.attendees.erase(std::unique(e.attendees.begin(), e.attendees.end()), e.attendees.end());
  }
  db.persons_ = std::move(persons);
  db.events_ = std::move(events);
  db.next_id_ = next_id.value_or(max_id + 1);
  db.validate();
  return db;
}

EntityId StubDb::insert_event(Event e) {
  e.id = next_id_;
  std::sort(e.attendees.begin(), e.attendees.end());
  e.attendees.erase(std::unique(e.attendees.begin(), e.attendees.end()), e.attendees.end());
  if (!(e.start < e.end)) throw FixtureError("event must start before it ends");
  for (EntityId a : e.attendees)
    if (!person(a)) throw FixtureError("attendee " + std::to_string(a) + " does not exist");
  events_.push_back(std::move(e));
  return next_id_++;
}

bool StubDb::remove_event(EntityId id) {
  auto it = std::find_if(events_.begin(), events_.end(), [&](const Event& e) { return e.id == id; });
  if (it == events_.end()) return false;
  events_.erase(it);
  return true;
}

void StubDb::validate() const {
  std::set<EntityId> ids;
  for (const auto& p : persons_)
    if (!ids.insert(p.id).second) throw FixtureError("duplicate id " + std::to_string(p.id));
  for (const auto& e : events_)
    if (!ids.insert(e.id).second) throw FixtureError("duplicate id " + std::to_string(e.id));
  for (EntityId id : ids)
    if (id >= next_id_) throw FixtureError("next_id must exceed every id");
  for (const auto& p : persons_) {
    if (p.manager_id && !person(*p.manager_id))
      throw FixtureError(p.name + "'s manager " + std::to_string(*p.manager_id) + " does not exist");
    // Walking up the chain must terminate within |persons| steps.
    const Person* cur = &p;
    for (std::size_t steps = 0; cur && cur->manager_id; ++steps) {
      if (steps > persons_.size()) throw FixtureError("managerial cycle through " + p.name);
      cur = person(*cur->manager_id);
    }
  }
  for (const auto& e : events_) {
    if (!(e.start < e.end)) throw FixtureError("event " + std::to_string(e.id) + " ends before it starts");
    for (EntityId a : e.attendees)
      if (!person(a))
        throw FixtureError("event " + std::to_string(e.id) + " attendee " + std::to_string(a) +
                           " does not exist");
  }
}

namespace json_io {

namespace {

DateTime read_instant(const json& j, const char* what) {
  if (!j.is_string()) throw FixtureError(std::string(what) + " must be an RFC 3339 string");
  auto dt = parse_datetime(j.get<std::string>());
  if (!dt) throw FixtureError(std::string(what) + " is not a valid RFC 3339 timestamp: " + j.dump());
  return *dt;
}

EntityKind read_kind(const std::string& s) {
  if (s == "Event") return EntityKind::Event;
  if (s == "Recipient") return EntityKind::Recipient;
  throw FixtureError("unknown entity kind " + s);
}

}  // namespace

json encode(const StubDb& db) {
  json persons = json::array();
  for (const auto& p : db.persons()) {
    persons.push_back({{"id", p.id},
                       {"name", p.name},
                       {"manager_id", p.manager_id ? json(*p.manager_id) : json(nullptr)}});
  }
  json events = json::array();
  for (const auto& e : db.events()) {
    events.push_back({{"id", e.id},
                      {"subject", e.subject},
                      {"start", format_datetime(e.start)},
                      {"end", format_datetime(e.end)},
                      {"attendees", e.attendees}});
  }
  return {{"persons", persons}, {"events", events}, {"next_id", db.next_id()}};
}

StubDb decode_db(const json& doc) {
  if (!doc.is_object()) throw FixtureError("fixture must be a JSON object");
  std::vector<Person> persons;
  std::vector<Event> events;
  std::optional<EntityId> next_id;
  try {
    for (const auto& p : doc.value("persons", json::array())) {
      Person person;
      person.id = p.at("id").get<EntityId>();
      person.name = p.at("name").get<std::string>();
      if (p.contains("manager_id") && !p["manager_id"].is_null())
        person.manager_id = p["manager_id"].get<EntityId>();
      persons.push_back(std::move(person));
    }
    for (const auto& e : doc.value("events", json::array())) {
      Event ev;
      ev.id = e.at("id").get<EntityId>();
      ev.subject = e.at("subject").get<std::string>();
      ev.start = read_instant(e.at("start"), "start");
      ev.end = read_instant(e.at("end"), "end");
      ev.attendees = e.value("attendees", std::vector<EntityId>{});
      events.push_back(std::move(ev));
    }
    if (doc.contains("next_id")) next_id = doc["next_id"].get<EntityId>();
  } catch (const json::exception& e) {
    throw FixtureError(std::string("malformed fixture: ") + e.what());
  }
  return StubDb::from_rows(std::move(persons), std::move(events), next_id);
}

json encode(const Constraint& c) {
  static const char* kOps[] = {"true", "leaf", "and", "or", "not"};
  json j = {{"op", kOps[static_cast<int>(c.op)]}, {"inner", c.inner.str()}};
  if (c.op == Constraint::Op::Leaf) {
    j["field"] = c.field;
    j["operand"] = encode(c.operand);
  }
  if (!c.children.empty()) {
    json kids = json::array();
    for (const auto& k : c.children) kids.push_back(encode(k));
    j["children"] = kids;
  }
  return j;
}

Constraint decode_constraint(const json& j) {
  auto inner = TypeTag::parse(j.at("inner").get<std::string>());
  if (!inner) throw FixtureError("bad constraint type " + j.at("inner").dump());
  std::string op = j.at("op").get<std::string>();
  std::vector<Constraint> kids;
  for (const auto& k : j.value("children", json::array())) kids.push_back(decode_constraint(k));
  Constraint c;
  if (op == "true") {
    c = Constraint::any(*inner);
  } else if (op == "leaf") {
    c = Constraint::leaf(*inner, j.at("field").get<std::string>(), decode_value(j.at("operand")));
  } else if (op == "and" || op == "or" || op == "not") {
    c.op = op == "and" ? Constraint::Op::And : op == "or" ? Constraint::Op::Or : Constraint::Op::Not;
    c.inner = *inner;
    c.children = std::move(kids);
  } else {
    throw FixtureError("bad constraint op " + op);
  }
  return c;
}

json encode(const Value& v) {
  struct Visitor {
    json operator()(const Unit&) const { return {{"type", "Unit"}}; }
    json operator()(bool b) const { return {{"type", "Bool"}, {"value", b}}; }
    json operator()(std::int64_t i) const { return {{"type", "Int"}, {"value", i}}; }
    json operator()(double d) const { return {{"type", "Float"}, {"value", d}}; }
    json operator()(const std::string& s) const { return {{"type", "Text"}, {"value", s}}; }
    json operator()(const Date& d) const { return {{"type", "Date"}, {"value", format_date(d)}}; }
    json operator()(const TimeOfDay& t) const { return {{"type", "Time"}, {"value", format_time(t)}}; }
    json operator()(const DateTime& dt) const {
      return {{"type", "DateTime"}, {"value", format_datetime(dt)}};
    }
    json operator()(const EntityRef& e) const { return {{"type", to_string(e.kind)}, {"id", e.id}}; }
    json operator()(const EntitySet& s) const {
      return {{"type", "SetOf(" + std::string(to_string(s.kind)) + ")"}, {"ids", s.ids}};
    }
    json operator()(const ConstraintPtr& c) const {
      return {{"type", "Constraint"}, {"constraint", encode(*c)}};
    }
  };
  return std::visit(Visitor{}, v.storage());
}

Value decode_value(const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "Unit") return Unit{};
  if (type == "Bool") return j.at("value").get<bool>();
  if (type == "Int") return j.at("value").get<std::int64_t>();
  if (type == "Float") return j.at("value").get<double>();
  if (type == "Text") return j.at("value").get<std::string>();
  if (type == "Date") {
    auto d = parse_date(j.at("value").get<std::string>());
    if (!d) throw FixtureError("bad date " + j.dump());
    return *d;
  }
  if (type == "Time") {
    std::string s = j.at("value").get<std::string>();
    if (s.size() != 5 || s[2] != ':') throw FixtureError("bad time " + s);
    return TimeOfDay{std::stoi(s.substr(0, 2)) * 60 + std::stoi(s.substr(3, 2))};
  }
  if (type == "DateTime") return read_instant(j.at("value"), "value");
  if (type == "Event" || type == "Recipient") return EntityRef{read_kind(type), j.at("id").get<EntityId>()};
  if (type == "SetOf(Event)" || type == "SetOf(Recipient)")
    return make_set(read_kind(type.substr(6, type.size() - 7)), j.at("ids").get<std::vector<EntityId>>());
  if (type == "Constraint") return share(decode_constraint(j.at("constraint")));
  throw FixtureError("unknown value type " + type);
}

}  // namespace json_io

}  // namespace dflow
