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

#ifndef DFLOW_GRAPH_HPP_
#define DFLOW_GRAPH_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dflow/db.hpp"
#include "dflow/expr.hpp"
#include "dflow/registry.hpp"
#include "dflow/types.hpp"
#include "dflow/value.hpp"

namespace dflow {

// Per-context node identity; allocated monotonically and never reused.
enum class NodeId : std::int64_t {};

inline std::int64_t raw(NodeId id) { return static_cast<std::int64_t>(id); }

enum class Origin { Annotated, Expansion, Db, Revision };

const char* to_string(Origin origin);

struct GraphNode {
  NodeId id{};
  // Function name, or "#Text", "#Int", ... for literal and value nodes.
  std::string func;
  // Parameter input key -> producer node, in parameter declaration order.
  std::vector<std::pair<std::string, NodeId>> inputs;
  // Literal and database value nodes carry their value up front.
  std::optional<Value> constant;
  std::optional<Value> result;
  // Node holding this node's execution result (database lookups, refer).
  std::optional<NodeId> result_node;
  TypeTag type_tag;
  Origin origin = Origin::Annotated;
  // Turn the node was created for; -1 for scratch nodes outside any turn.
  int turn_index = 0;

  bool is_value_node() const { return constant.has_value(); }
  std::optional<NodeId> input(std::string_view key) const;
};

// Engine exception doubling as an agent prompt.
struct EngineException {
  enum class Kind { MissingValue, NoMatch, MultipleMatches, TypeMismatch, DomainError };

  Kind kind = Kind::DomainError;
  // Node where raised; empty for failures of API-level searches (refer or
  // revise called outside any graph).
  std::optional<NodeId> node;
  std::optional<std::string> slot;
  std::string prompt;
  std::optional<TypeTag> expected;

  friend bool operator==(const EngineException&, const EngineException&) = default;
};

const char* to_string(EngineException::Kind kind);

struct ContextOptions {
  // refer falls back to a database query when no graph node matches.
  bool fallback_db = false;
};

// Dialogue history: one root per turn, the node table, pending exceptions and
// agent messages. Single owner; the registry is shared read-only.
class DialogueContext {
 public:
  DialogueContext(const FunctionRegistry& registry, StubDb db, DateTime clock);

  const FunctionRegistry& registry() const { return *registry_; }
  DateTime clock() const { return clock_; }
  StubDb& db() { return db_; }
  const StubDb& db() const { return db_; }

  const std::vector<NodeId>& turns() const { return turns_; }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  bool contains(NodeId id) const;
  // Throws BuildError(UnknownNode).
  const GraphNode& node(NodeId id) const;
  GraphNode& node(NodeId id);

  NodeId add_node(GraphNode n);
  void append_turn(NodeId root);
  // Index the next appended turn will get.
  int next_turn_index() const { return static_cast<int>(turns_.size()); }

  std::vector<EngineException>& exceptions() { return exceptions_; }
  const std::vector<EngineException>& exceptions() const { return exceptions_; }
  std::vector<std::string>& messages() { return messages_; }
  const std::vector<std::string>& messages() const { return messages_; }

  ContextOptions options;

 private:
  const FunctionRegistry* registry_;
  StubDb db_;
  DateTime clock_;
  std::vector<NodeId> turns_;
  std::vector<GraphNode> nodes_;
  std::vector<EngineException> exceptions_;
  std::vector<std::string> messages_;
};

// Builds one node per call (plus literal nodes) and appends the root as a new
// turn. Nodes whose expression carries the synthesized flag get
// Origin::Expansion. Throws BuildError.
NodeId build_graph(const Expr& e, DialogueContext& ctx);

// Builds without appending a turn; nodes get `turn_index` and `origin`
// (synthesized expressions still get Origin::Expansion).
NodeId build_detached(const Expr& e, DialogueContext& ctx, int turn_index,
                      Origin origin = Origin::Annotated);

struct Duplicate {
  NodeId root{};
  std::map<NodeId, NodeId> copies;  // original -> copy
};

// Deep-copies the input closure of `root` with fresh ids and cleared results.
// Shared nodes stay shared. Copies get Origin::Revision and the next turn
// index. Throws BuildError(UnknownNode).
NodeId duplicate_subgraph(NodeId root, DialogueContext& ctx);
Duplicate duplicate_subgraph_mapped(NodeId root, DialogueContext& ctx);

struct DiffEntry {
  std::string path;  // "/", "/constraint/constraints.1"
  std::string difference;
  friend bool operator==(const DiffEntry&, const DiffEntry&) = default;
};

// Structural diff by function name, literal value and input-edge shape;
// ignores ids, origins and results.
std::vector<DiffEntry> graph_diff(const DialogueContext& ctx, NodeId a, NodeId b);

// Every input path from `root` reaching `target` ("/" when equal).
std::vector<std::string> paths_to(const DialogueContext& ctx, NodeId root, NodeId target);

// Input closure of `root` in ascending id order.
std::vector<NodeId> reachable(const DialogueContext& ctx, NodeId root);

// Throws BuildError(Cycle) if the input edges reachable from root loop.
void check_acyclic(const DialogueContext& ctx, NodeId root);

struct DotOptions {
  bool hide_results = false;
  bool show_values = true;
  std::string graph_name = "dataflow";
};

// Graphviz digraph. Fill colors by origin: annotated gray, expansion yellow,
// db green, revision lightblue. Execution results are blue dashed edges.
std::string emit_dot(const DialogueContext& ctx, NodeId root, const DotOptions& opts = {});

// JSON document with the node table, turn roots, exceptions, messages, clock
// and database rows.
std::string snapshot_json(const DialogueContext& ctx);
DialogueContext restore_snapshot(std::string_view json_text, const FunctionRegistry& registry);

}  // namespace dflow

#endif  // DFLOW_GRAPH_HPP_
