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

#ifndef DFLOW_CALENDAR_HPP_
#define DFLOW_CALENDAR_HPP_

#include <string>

#include "dflow/registry.hpp"
#include "dflow/value.hpp"

namespace dflow {

// Calendar functions of the simplified vocabulary: FindPerson, FindManager,
// FindEvents, DeleteEvent, CreateEvent, date/time builders, constraint
// builders (starts_at, with_attendee, has_subject) and attribute accessors.
void register_calendar(FunctionRegistry& registry);

// Original-vocabulary functions with their explicit steps
// (DeletePreflightEventWrapper, RecipientWithNameLike, Execute, ...). Flagged
// legacy in the registry.
void register_legacy(FunctionRegistry& registry);

// (function, parameter, actual tag) -> calls wrapped around the argument.
void register_coercions(FunctionRegistry& registry);

// Core operators, calendar, legacy functions and the coercion table.
FunctionRegistry make_default_registry();

// 2022-01-01T09:00:00Z.
DateTime default_clock();

// Directory holding fixture.json, rules/ and corpus/. DFLOW_DATA_DIR in the
// environment overrides the compiled-in location.
std::string default_data_dir();

// DFLOW_FIXTURE, else default_data_dir() + "/fixture.json".
std::string default_fixture_path();

}  // namespace dflow

#endif  // DFLOW_CALENDAR_HPP_
