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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cctype>

#include "doctest.h"
#include "support.hpp"

using namespace dflow;
namespace t = dflow::testing;
using Kind = EngineException::Kind;

namespace {

const std::vector<std::string> kNames = {"Alice", "Dana", "John", "Emily", "Bob", "Carol"};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Event filter with its own reading of the vocabulary, evaluated straight on
// fixture rows.
struct Filter {
  std::string text;
  std::function<bool(const Event&, const StubDb&)> keep;
};

EntityId id_of(const StubDb& db, const std::string& name) {
  for (const auto& p : db.persons())
    if (p.name == name) return p.id;
  return 0;
}

Filter random_filter(std::mt19937& rng, int depth) {
  int roll = static_cast<int>(rng() % 7);
  if (depth == 0 || roll < 2) {
    switch (rng() % 4) {
      case 0: {
        std::string n = kNames[rng() % kNames.size()];
        return {"with_attendee(" + n + ")", [n](const Event& e, const StubDb& db) {
                  EntityId id = id_of(db, n);
                  return std::find(e.attendees.begin(), e.attendees.end(), id) != e.attendees.end();
                }};
      }
      case 1: {
        static const char* days[] = {"Today()", "Tomorrow()", "NextWeek()"};
        static const char* dates[] = {"2022-01-01", "2022-01-02", "2022-01-08"};
        auto k = rng() % 3;
        std::string date = dates[k];
        return {std::string("starts_at(") + days[k] + ")",
                [date](const Event& e, const StubDb&) { return format_date(e.start.date()) == date; }};
      }
      case 2: {
        static const char* subjects[] = {"lunch", "PLANNING", "Team sync", "nope"};
        std::string s = subjects[rng() % 4];
        return {"has_subject(\"" + s + "\")",
                [s](const Event& e, const StubDb&) { return lower(e.subject) == lower(s); }};
      }
      default: {
        int hour = 9 + static_cast<int>(rng() % 7);
        std::string when = "2022-01-02T" + std::string(hour < 10 ? "0" : "") +
                           std::to_string(hour) + ":00:00Z";
        std::string time = hour < 12 ? "NumberAM(" + std::to_string(hour) + ")"
                                     : "NumberPM(" + std::to_string(hour == 12 ? 12 : hour - 12) + ")";
        return {"starts_at(DateAtTime(Tomorrow(), " + time + "))",
                [when](const Event& e, const StubDb&) { return format_datetime(e.start) == when; }};
      }
    }
  }
  if (roll == 2) {
    Filter inner = random_filter(rng, depth - 1);
    return {"NOT(" + inner.text + ")",
            [inner](const Event& e, const StubDb& db) { return !inner.keep(e, db); }};
  }
  std::vector<Filter> parts;
  int n = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) parts.push_back(random_filter(rng, depth - 1));
  bool conj = roll % 2 == 0;
  std::string text = conj ? "AND(" : "OR(";
  for (int i = 0; i < n; ++i) text += (i ? ", " : "") + parts[static_cast<std::size_t>(i)].text;
  return {text + ")", [parts, conj](const Event& e, const StubDb& db) {
            for (const auto& p : parts)
              if (p.keep(e, db) != conj) return !conj;
            return conj;
          }};
}

Value events(std::vector<EntityId> ids) { return make_set(EntityKind::Event, std::move(ids)); }

std::vector<EntityId> brute_force(const Filter& f, const StubDb& db) {
  std::vector<EntityId> ids;
  for (const auto& e : db.events())
    if (f.keep(e, db)) ids.push_back(e.id);
  return ids;
}

// Calls the expand phase wrapped around the argument of DeleteEvent.
std::vector<std::string> inserted_for(const std::string& arg) {
  Expr e = t::expanded("DeleteEvent(" + arg + ")");
  std::vector<std::string> out;
  const Expr* cur = &e.args.at(0);
  while (cur->is_call() && cur->synthesized) {
    out.push_back(cur->name);
    cur = &cur->args.at(0);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("the shipped fixture") {
  const StubDb& db = t::fixture();
  CHECK(db.persons().size() == 6);
  CHECK(db.events().size() == 5);
  CHECK_NOTHROW(db.validate());
  // John reports to Dana; two levels of management.
  const Person* john = db.person(id_of(db, "John"));
  REQUIRE(john->manager_id);
  CHECK(db.person(*john->manager_id)->name == "Dana");
  int tomorrow_with_dana = 0;
  for (const auto& e : db.events())
    if (format_date(e.start.date()) == "2022-01-02" &&
        std::count(e.attendees.begin(), e.attendees.end(), id_of(db, "Dana")))
      ++tomorrow_with_dana;
  CHECK(tomorrow_with_dana == 1);
}

TEST_CASE("fixture validation") {
  CHECK_THROWS_AS(StubDb::parse("{\"persons\": [{\"id\": 1}]}"), FixtureError);
  CHECK_THROWS_AS(StubDb::parse("not json"), FixtureError);
  CHECK_THROWS_AS(StubDb::from_rows({{1, "A", 9}}, {}), FixtureError);
  StubDb round = StubDb::parse(t::fixture().dump());
  CHECK(round == t::fixture());
}

TEST_CASE("people by name") {
  auto ctx = t::fresh_context();
  auto r = t::run("FindPerson(\"john\")", ctx);
  REQUIRE(r.ok());
  CHECK(*r.value == Value(EntityRef{EntityKind::Recipient, id_of(t::fixture(), "John")}));
  CHECK(t::run("FindPerson(Zebediah)", ctx).error->kind == Kind::NoMatch);

  StubDb twins = StubDb::from_rows({{1, "Alex", std::nullopt}, {2, "alex", std::nullopt}}, {});
  DialogueContext tctx(t::registry(), twins, default_clock());
  CHECK(t::run("FindPerson(Alex)", tctx).error->kind == Kind::MultipleMatches);
}

TEST_CASE("managers") {
  auto ctx = t::fresh_context();
  CHECK(*t::run("FindManager(John)", ctx).value ==
        Value(EntityRef{EntityKind::Recipient, id_of(t::fixture(), "Dana")}));
  auto ceo = t::run("FindManager(Alice)", ctx);
  CHECK(ceo.error->kind == Kind::DomainError);
  CHECK_FALSE(ceo.error->prompt.empty());
  for (const auto& n : kNames) {
    auto by_name = t::run("FindManager(" + n + ")", ctx);
    auto by_person = t::run("FindManager(FindPerson(\"" + n + "\"))", ctx);
    CHECK(by_name.ok() == by_person.ok());
    if (by_name.ok()) CHECK(*by_name.value == *by_person.value);
  }
}

TEST_CASE("event queries against a brute-force filter") {
  auto ctx = t::fresh_context();
  CHECK(*t::run("FindEvents(AND(starts_at(Tomorrow()), with_attendee(FindManager(John))))", ctx)
             .value == events({3}));
  CHECK(*t::run("FindEvents(AND(with_attendee(Alice), NOT(with_attendee(Alice))))", ctx).value ==
        events({}));
  CHECK(*t::run("FindEvents()", ctx).value == events({1, 2, 3, 4, 5}));
  CHECK(*t::run("FindEvents(of_type(Event))", ctx).value == events({1, 2, 3, 4, 5}));

  std::mt19937 rng(2022);
  for (int trial = 0; trial < 500; ++trial) {
    Filter f = random_filter(rng, 3);
    auto r = t::run("FindEvents(" + f.text + ")", ctx);
    REQUIRE_MESSAGE(r.ok(), f.text);
    CHECK_MESSAGE(*r.value == events(brute_force(f, ctx.db())), f.text);
  }
}

TEST_CASE("builders") {
  auto ctx = t::fresh_context();
  CHECK(*t::run("Tomorrow()", ctx).value == Value(make_date(2022, 1, 2)));
  CHECK(*t::run("NextWeek()", ctx).value == Value(make_date(2022, 1, 8)));
  CHECK(*t::run("NumberPM(3)", ctx).value == Value(TimeOfDay{15 * 60}));
  CHECK(*t::run("NumberPM(12)", ctx).value == Value(TimeOfDay{12 * 60}));
  CHECK(*t::run("NumberAM(12)", ctx).value == Value(TimeOfDay{0}));
  CHECK(t::run("NumberPM(13)", ctx).error->kind == Kind::DomainError);

  Value dana = *t::run("FindEvents(with_attendee(Dana))", ctx).value;
  Value tomorrow = *t::run("FindEvents(starts_at(Tomorrow()))", ctx).value;
  Value both = *t::run("FindEvents(AND(starts_at(Tomorrow()), with_attendee(Dana)))", ctx).value;
  CHECK(dana == events({3, 4, 5}));
  std::vector<EntityId> inter;
  const auto& a = dana.as<EntitySet>().ids;
  const auto& b = tomorrow.as<EntitySet>().ids;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  CHECK(both == events(inter));
}

TEST_CASE("deleting events") {
  auto ctx = t::fresh_context();
  StubDb before = ctx.db();
  CHECK(t::run("DeleteEvent(with_attendee(John))", ctx).error->kind == Kind::MultipleMatches);
  CHECK(ctx.db() == before);
  REQUIRE(t::run("DeleteEvent(3)", ctx).ok());
  CHECK(ctx.db().event(3) == nullptr);
  CHECK(t::run("DeleteEvent(3)", ctx).error->kind == Kind::NoMatch);

  auto set_ctx = t::fresh_context();
  REQUIRE(t::run("DeleteEvent(FindEvents(has_subject(\"Project kickoff\")))", set_ctx).ok());
  CHECK(set_ctx.db().event(3) == nullptr);
  CHECK(set_ctx.db().events().size() == 4);
}

TEST_CASE("creating events") {
  auto ctx = t::fresh_context();
  auto r = t::run(
      "CreateEvent(subject=\"lunch\", start=DateAtTime(Tomorrow(), NumberPM(12)), "
      "end=DateAtTime(Tomorrow(), NumberPM(1)))",
      ctx);
  REQUIRE(r.ok());
  const Event* e = ctx.db().event(r.value->as<EntityRef>().id);
  REQUIRE(e);
  CHECK(e->subject == "lunch");
  CHECK(format_datetime(e->start) == "2022-01-02T12:00:00Z");
  CHECK(format_datetime(e->end) == "2022-01-02T13:00:00Z");
  CHECK(e->id == t::fixture().next_id());

  auto with_people = t::fresh_context();
  auto p = t::run(
      "CreateEvent(AND(has_subject(\"sync\"), starts_at(DateAtTime(Tomorrow(), NumberAM(9))), "
      "with_attendee(Bob, Dana)))",
      with_people);
  REQUIRE(p.ok());
  const Event* pe = with_people.db().event(p.value->as<EntityRef>().id);
  CHECK(pe->attendees == std::vector<EntityId>{id_of(t::fixture(), "Dana"), id_of(t::fixture(), "Bob")});

  auto missing = t::fresh_context();
  auto m = t::run("CreateEvent(start=DateAtTime(Tomorrow(), NumberPM(3)))", missing);
  REQUIRE_FALSE(m.ok());
  CHECK(m.error->kind == Kind::MissingValue);
  CHECK(m.error->slot == "subject");
  CHECK_FALSE(m.error->prompt.empty());
  auto done = resume_exception(Expr::text("standup"), missing);
  REQUIRE(done.result.ok());
  CHECK(missing.db().events().back().subject == "standup");

  auto no_start = t::fresh_context();
  CHECK(t::run("CreateEvent(subject=\"x\")", no_start).error->slot == "start");
  auto backwards = t::fresh_context();
  CHECK(t::run("CreateEvent(subject=\"x\", start=DateAtTime(Tomorrow(), NumberPM(3)), "
               "end=DateAtTime(Tomorrow(), NumberPM(2)))",
               backwards)
            .error->kind == Kind::DomainError);
}

TEST_CASE("coercion table") {
  const auto& r = t::registry();
  auto chain = [&](const char* f, const char* p, TypeTag tag) {
    const auto* c = r.coercion(f, p, tag);
    return c ? *c : std::vector<std::string>{};
  };
  CHECK(chain("DeleteEvent", "target", TypeTag::set_of(TypeTag::Kind::Event)) ==
        std::vector<std::string>{"singleton", "Event.id"});
  CHECK(chain("DeleteEvent", "target", TypeTag::Kind::Event) ==
        std::vector<std::string>{"Event.id"});
  CHECK(r.coercion("DeleteEvent", "target", TypeTag::Kind::Int) == nullptr);
  CHECK(chain("FindManager", "person", TypeTag::Kind::Text) ==
        std::vector<std::string>{"FindPerson"});
}

TEST_CASE("expanding DeleteEvent by argument type") {
  CHECK(inserted_for("FindEvents(has_subject(\"Project kickoff\"))") ==
        std::vector<std::string>{"singleton", "Event.id"});
  CHECK(inserted_for("singleton(FindEvents(has_subject(\"Project kickoff\")))") ==
        std::vector<std::string>{"Event.id"});
  CHECK(inserted_for("3").empty());
  CHECK(inserted_for("has_subject(\"Project kickoff\")") ==
        std::vector<std::string>{"FindEvents", "singleton", "Event.id"});
  CHECK_THROWS_AS(t::expanded("DeleteEvent(Today())"), ExpansionError);
}
