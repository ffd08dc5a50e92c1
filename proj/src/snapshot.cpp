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

#include "dflow/graph.hpp"
#include "json_io.hpp"

namespace dflow {

using json_io::json;

namespace {

Origin read_origin(const std::string& s) {
  for (Origin o : {Origin::Annotated, Origin::Expansion, Origin::Db, Origin::Revision})
    if (s == to_string(o)) return o;
  throw FixtureError("unknown origin " + s);
}

EngineException::Kind read_kind(const std::string& s) {
  using K = EngineException::Kind;
  for (K k : {K::MissingValue, K::NoMatch, K::MultipleMatches, K::TypeMismatch, K::DomainError})
    if (s == to_string(k)) return k;
  throw FixtureError("unknown exception kind " + s);
}

TypeTag read_tag(const json& j) {
  auto t = TypeTag::parse(j.get<std::string>());
  if (!t) throw FixtureError("bad type tag " + j.dump());
  return *t;
}

}  // namespace

std::string snapshot_json(const DialogueContext& ctx) {
  json nodes = json::array();
  for (const auto& n : ctx.nodes()) {
    json inputs = json::array();
    for (const auto& [k, id] : n.inputs) inputs.push_back({k, raw(id)});
    json j = {{"id", raw(n.id)},
              {"func", n.func},
              {"inputs", inputs},
              {"type", n.type_tag.str()},
              {"origin", to_string(n.origin)},
              {"turn", n.turn_index}};
    if (n.constant) j["constant"] = json_io::encode(*n.constant);
    if (n.result) j["result"] = json_io::encode(*n.result);
    if (n.result_node) j["result_node"] = raw(*n.result_node);
    nodes.push_back(std::move(j));
  }
  json turns = json::array();
  for (NodeId t : ctx.turns()) turns.push_back(raw(t));
  json exceptions = json::array();
  for (const auto& e : ctx.exceptions()) {
    json j = {{"kind", to_string(e.kind)}, {"prompt", e.prompt}};
    j["node"] = e.node ? json(raw(*e.node)) : json(nullptr);
    j["slot"] = e.slot ? json(*e.slot) : json(nullptr);
    j["expected"] = e.expected ? json(e.expected->str()) : json(nullptr);
    exceptions.push_back(std::move(j));
  }
  json doc = {{"clock", format_datetime(ctx.clock())},
              {"options", {{"fallback_db", ctx.options.fallback_db}}},
              {"turns", turns},
              {"nodes", nodes},
              {"exceptions", exceptions},
              {"messages", ctx.messages()},
              {"db", json_io::encode(ctx.db())}};
  return doc.dump(2);
}

DialogueContext restore_snapshot(std::string_view json_text, const FunctionRegistry& registry) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FixtureError(std::string("context snapshot is not valid JSON: ") + e.what());
  }
  try {
    auto clock = parse_datetime(doc.at("clock").get<std::string>());
    if (!clock) throw FixtureError("bad snapshot clock");
    DialogueContext ctx(registry, json_io::decode_db(doc.at("db")), *clock);
    ctx.options.fallback_db = doc.value("options", json::object()).value("fallback_db", false);
    std::int64_t expect = 0;
    for (const auto& j : doc.at("nodes")) {
      if (j.at("id").get<std::int64_t>() != expect++)
        throw FixtureError("snapshot node ids must be contiguous from 0");
      GraphNode n;
      n.func = j.at("func").get<std::string>();
      for (const auto& in : j.at("inputs")) {
        NodeId src{in.at(1).get<std::int64_t>()};
        if (raw(src) < 0 || raw(src) >= static_cast<std::int64_t>(doc.at("nodes").size()))
          throw FixtureError("snapshot input references unknown node");
        n.inputs.emplace_back(in.at(0).get<std::string>(), src);
      }
      n.type_tag = read_tag(j.at("type"));
      n.origin = read_origin(j.at("origin").get<std::string>());
      n.turn_index = j.at("turn").get<int>();
      if (j.contains("constant")) n.constant = json_io::decode_value(j["constant"]);
      if (j.contains("result")) n.result = json_io::decode_value(j["result"]);
      if (j.contains("result_node")) n.result_node = NodeId{j["result_node"].get<std::int64_t>()};
      ctx.add_node(std::move(n));
    }
    for (const auto& t : doc.at("turns")) ctx.append_turn(NodeId{t.get<std::int64_t>()});
    for (const auto& j : doc.value("exceptions", json::array())) {
      EngineException e;
      e.kind = read_kind(j.at("kind").get<std::string>());
      e.prompt = j.at("prompt").get<std::string>();
      if (!j["node"].is_null()) e.node = NodeId{j["node"].get<std::int64_t>()};
      if (!j["slot"].is_null()) e.slot = j["slot"].get<std::string>();
      if (!j["expected"].is_null()) e.expected = read_tag(j["expected"]);
      ctx.exceptions().push_back(std::move(e));
    }
    ctx.messages() = doc.value("messages", std::vector<std::string>{});
    for (const auto& n : ctx.nodes()) {
      if (n.result_node) ctx.node(*n.result_node);
      if (n.turn_index >= 0) check_acyclic(ctx, n.id);
    }
    return ctx;
  } catch (const json::exception& e) {
    throw FixtureError(std::string("malformed context snapshot: ") + e.what());
  } catch (const BuildError& e) {
    throw FixtureError(std::string("inconsistent context snapshot: ") + e.what());
  }
}

}  // namespace dflow
