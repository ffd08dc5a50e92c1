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

#include <algorithm>
#include <functional>
#include <set>

namespace dflow {

const char* to_string(Origin origin) {
  switch (origin) {
    case Origin::Annotated: return "annotated";
    case Origin::Expansion: return "expansion";
    case Origin::Db: return "db";
    case Origin::Revision: return "revision";
  }
  return "?";
}

const char* to_string(EngineException::Kind kind) {
  switch (kind) {
    case EngineException::Kind::MissingValue: return "MissingValue";
    case EngineException::Kind::NoMatch: return "NoMatch";
    case EngineException::Kind::MultipleMatches: return "MultipleMatches";
    case EngineException::Kind::TypeMismatch: return "TypeMismatch";
    case EngineException::Kind::DomainError: return "DomainError";
  }
  return "?";
}

std::optional<NodeId> GraphNode::input(std::string_view key) const {
  for (const auto& [k, id] : inputs)
    if (k == key) return id;
  return std::nullopt;
}

DialogueContext::DialogueContext(const FunctionRegistry& registry, StubDb db, DateTime clock)
    : registry_(&registry), db_(std::move(db)), clock_(clock) {}

bool DialogueContext::contains(NodeId id) const {
  return raw(id) >= 0 && static_cast<std::size_t>(raw(id)) < nodes_.size();
}

const GraphNode& DialogueContext::node(NodeId id) const {
  if (!contains(id))
    throw BuildError(BuildError::Kind::UnknownNode, "unknown node " + std::to_string(raw(id)));
  return nodes_[static_cast<std::size_t>(raw(id))];
}

GraphNode& DialogueContext::node(NodeId id) {
  if (!contains(id))
    throw BuildError(BuildError::Kind::UnknownNode, "unknown node " + std::to_string(raw(id)));
  return nodes_[static_cast<std::size_t>(raw(id))];
}

NodeId DialogueContext::add_node(GraphNode n) {
  n.id = NodeId{static_cast<std::int64_t>(nodes_.size())};
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

void DialogueContext::append_turn(NodeId root) {
  node(root);
  turns_.push_back(root);
}

namespace {

const char* literal_func(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Text: return "#Text";
    case ExprKind::Symbol: return "#Symbol";
    case ExprKind::Number: return e.is_integer() ? "#Int" : "#Float";
    case ExprKind::Bool: return "#Bool";
    default: return "#?";
  }
}

Value literal_value(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Text:
    case ExprKind::Symbol: return e.name;
    case ExprKind::Number:
      if (e.is_integer()) return static_cast<std::int64_t>(e.as_integer());
      return e.as_double();
    case ExprKind::Bool: return e.flag;
    default: return Unit{};
  }
}

class Builder {
 public:
  Builder(DialogueContext& ctx, int turn, Origin origin) : ctx_(ctx), turn_(turn), origin_(origin) {}

  NodeId build(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Call: return build_call(e);
      case ExprKind::Let: {
        std::size_t mark = scope_.size();
        for (const auto& [name, value] : e.named) scope_.emplace_back(name, build(value));
        NodeId body = build(e.let_body());
        scope_.resize(mark);
        return body;
      }
      case ExprKind::VarRef:
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
          if (it->first == e.name) return it->second;
        throw BuildError(BuildError::Kind::UnboundVariable, "unbound variable " + e.name);
      case ExprKind::PatternVar:
      case ExprKind::SegmentVar:
      case ExprKind::Wildcard:
        throw BuildError(BuildError::Kind::NotExecutable,
                         "pattern variable ?" + e.name + " in executable expression");
      default: {
        GraphNode n;
        n.func = literal_func(e);
        n.constant = literal_value(e);
        n.type_tag = literal_tag(e);
        n.origin = e.synthesized ? Origin::Expansion : origin_;
        n.turn_index = turn_;
        return ctx_.add_node(std::move(n));
      }
    }
  }

 private:
  NodeId build_call(const Expr& e) {
    const FunctionSpec* spec = ctx_.registry().find(e.name);
    if (!spec) throw BuildError(BuildError::Kind::UnknownFunction, "unknown function " + e.name);
    auto bound = bind_arguments(*spec, e);
    GraphNode n;
    n.func = e.name;
    ArgTypes types;
    types.call = &e;
    for (const auto& [key, arg] : bound) {
      NodeId child = build(*arg);
      n.inputs.emplace_back(key, child);
      types.tags.emplace_back(key, ctx_.node(child).type_tag);
    }
    n.type_tag = spec->returns ? spec->returns(types) : TypeTag(TypeTag::Kind::Any);
    n.origin = e.synthesized ? Origin::Expansion : origin_;
    n.turn_index = turn_;
    return ctx_.add_node(std::move(n));
  }

  DialogueContext& ctx_;
  int turn_;
  Origin origin_;
  std::vector<std::pair<std::string, NodeId>> scope_;
};

}  // namespace

NodeId build_detached(const Expr& e, DialogueContext& ctx, int turn_index, Origin origin) {
  NodeId root = Builder(ctx, turn_index, origin).build(e);
  check_acyclic(ctx, root);
  return root;
}

NodeId build_graph(const Expr& e, DialogueContext& ctx) {
  NodeId root = build_detached(e, ctx, ctx.next_turn_index());
  ctx.append_turn(root);
  return root;
}

std::vector<NodeId> reachable(const DialogueContext& ctx, NodeId root) {
  std::set<NodeId> seen;
  std::vector<NodeId> stack{root};
  ctx.node(root);
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    for (const auto& [k, in] : ctx.node(id).inputs) stack.push_back(in);
  }
  return {seen.begin(), seen.end()};
}

void check_acyclic(const DialogueContext& ctx, NodeId root) {
  enum class Mark { Open, Done };
  std::map<NodeId, Mark> marks;
  std::function<void(NodeId)> visit = [&](NodeId id) {
    auto it = marks.find(id);
    if (it != marks.end()) {
      if (it->second == Mark::Open)
        throw BuildError(BuildError::Kind::Cycle, "cycle through node " + std::to_string(raw(id)));
      return;
    }
    marks[id] = Mark::Open;
    for (const auto& [k, in] : ctx.node(id).inputs) visit(in);
    marks[id] = Mark::Done;
  };
  visit(root);
}

Duplicate duplicate_subgraph_mapped(NodeId root, DialogueContext& ctx) {
  ctx.node(root);
  Duplicate out;
  int turn = ctx.next_turn_index();
  std::function<NodeId(NodeId)> copy = [&](NodeId id) -> NodeId {
    if (auto it = out.copies.find(id); it != out.copies.end()) return it->second;
    GraphNode n = ctx.node(id);
    for (auto& [k, in] : n.inputs) in = copy(in);
    n.result.reset();
    n.result_node.reset();
    n.origin = Origin::Revision;
    n.turn_index = turn;
    NodeId fresh = ctx.add_node(std::move(n));
    out.copies.emplace(id, fresh);
    return fresh;
  };
  out.root = copy(root);
  return out;
}

NodeId duplicate_subgraph(NodeId root, DialogueContext& ctx) {
  return duplicate_subgraph_mapped(root, ctx).root;
}

namespace {

std::string join_path(const std::string& path, std::string_view key) {
  return path == "/" ? "/" + std::string(key) : path + "/" + std::string(key);
}

}  // namespace

std::vector<DiffEntry> graph_diff(const DialogueContext& ctx, NodeId a, NodeId b) {
  std::vector<DiffEntry> out;
  std::set<std::pair<NodeId, NodeId>> seen;
  std::function<void(NodeId, NodeId, const std::string&)> walk = [&](NodeId x, NodeId y,
                                                                     const std::string& path) {
    if (!seen.insert({x, y}).second) return;
    const GraphNode& nx = ctx.node(x);
    const GraphNode& ny = ctx.node(y);
    if (nx.func != ny.func) {
      out.push_back({path, "function " + nx.func + " -> " + ny.func});
      return;
    }
    if (nx.constant != ny.constant) {
      out.push_back({path, "value " + (nx.constant ? nx.constant->str() : "none") + " -> " +
                               (ny.constant ? ny.constant->str() : "none")});
      return;
    }
    for (const auto& [key, in] : nx.inputs) {
      if (auto other = ny.input(key)) {
        walk(in, *other, join_path(path, key));
      } else {
        out.push_back({join_path(path, key), "input removed"});
      }
    }
    for (const auto& [key, in] : ny.inputs)
      if (!nx.input(key)) out.push_back({join_path(path, key), "input added"});
  };
  walk(a, b, "/");
  return out;
}

std::vector<std::string> paths_to(const DialogueContext& ctx, NodeId root, NodeId target) {
  std::vector<std::string> out;
  std::function<void(NodeId, const std::string&)> walk = [&](NodeId id, const std::string& path) {
    if (id == target) {
      out.push_back(path);
      return;
    }
    for (const auto& [key, in] : ctx.node(id).inputs) walk(in, join_path(path, key));
  };
  walk(root, "/");
  return out;
}

}  // namespace dflow
