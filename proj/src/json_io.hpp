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

// JSON encodings shared by the fixture loader and context snapshots.

#ifndef DFLOW_SRC_JSON_IO_HPP_
#define DFLOW_SRC_JSON_IO_HPP_

#include "json.hpp"

#include "dflow/db.hpp"
#include "dflow/value.hpp"

namespace dflow::json_io {

using nlohmann::json;

json encode(const Value& v);
Value decode_value(const json& j);

json encode(const Constraint& c);
Constraint decode_constraint(const json& j);

json encode(const StubDb& db);
StubDb decode_db(const json& j);

}  // namespace dflow::json_io

#endif  // DFLOW_SRC_JSON_IO_HPP_
