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

#ifndef DFLOW_DB_HPP_
#define DFLOW_DB_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dflow/value.hpp"

namespace dflow {

struct Person {
  EntityId id = 0;
  std::string name;
  std::optional<EntityId> manager_id;
  friend bool operator==(const Person&, const Person&) = default;
};

struct Event {
  EntityId id = 0;
  std::string subject;
  DateTime start;
  DateTime end;
  std::vector<EntityId> attendees;  // sorted, unique
  friend bool operator==(const Event&, const Event&) = default;
};

class FixtureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// In-memory people/events store seeded from a JSON fixture:
//
//   {"persons": [{"id": 1, "name": "Alice", "manager_id": null}, ...],
//    "events":  [{"id": 10, "subject": "...", "start": "2022-01-02T14:00:00Z",
//                 "end": "...", "attendees": [1, 3]}, ...]}
//
// Person and event ids share one counter; next_id starts past the largest id
// unless the document pins "next_id".
class StubDb {
 public:
  StubDb() = default;

  static StubDb parse(std::string_view json_text);
  static StubDb load(const std::string& path);
  std::string dump() const;

  const std::vector<Person>& persons() const { return persons_; }
  const std::vector<Event>& events() const { return events_; }
  EntityId next_id() const { return next_id_; }

  const Person* person(EntityId id) const;
  const Event* event(EntityId id) const;
  // Case-insensitive exact match.
  std::vector<const Person*> persons_named(std::string_view name) const;

  // Validates the row and assigns a fresh id. Throws FixtureError on an
  // invariant violation, leaving the store unchanged.
  EntityId insert_event(Event e);
  bool remove_event(EntityId id);

  // Throws FixtureError naming the first violated invariant.
  void validate() const;

  // Builds and validates a store from raw rows.
  static StubDb from_rows(std::vector<Person> persons, std::vector<Event> events,
                          std::optional<EntityId> next_id = std::nullopt);

  friend bool operator==(const StubDb&, const StubDb&) = default;

 private:
  std::vector<Person> persons_;
  std::vector<Event> events_;
  EntityId next_id_ = 1;
};

bool iequals(std::string_view a, std::string_view b);

}  // namespace dflow

#endif  // DFLOW_DB_HPP_
