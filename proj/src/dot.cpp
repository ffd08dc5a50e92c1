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

#include <set>
#include <sstream>

#include "dflow/graph.hpp"

namespace dflow {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

const char* fill_color(Origin origin) {
  switch (origin) {
    case Origin::Annotated: return "gray";
    case Origin::Expansion: return "yellow";
    case Origin::Db: return "green";
    case Origin::Revision: return "lightblue";
  }
  return "white";
}

std::string label_of(const GraphNode& n, bool show_values) {
  if (n.constant) {
    if (n.func == "#Symbol") return n.constant->as<std::string>();
    return n.constant->str();
  }
  std::string label = n.func;
  if (show_values && n.result && !n.result_node) label += "\n= " + n.result->str();
  return label;
}

}  // namespace

std::string emit_dot(const DialogueContext& ctx, NodeId root, const DotOptions& opts) {
  std::vector<NodeId> nodes = reachable(ctx, root);
  std::set<NodeId> included(nodes.begin(), nodes.end());
  std::vector<std::pair<NodeId, NodeId>> result_edges;
  if (!opts.hide_results) {
    for (NodeId id : nodes) {
      const GraphNode& n = ctx.node(id);
      if (n.result && n.result_node) result_edges.emplace_back(id, *n.result_node);
    }
    for (const auto& [from, to] : result_edges) included.insert(to);
  }

  std::ostringstream os;
  os << "digraph " << opts.graph_name << " {\n";
  os << "  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n";
  for (NodeId id : included) {
    const GraphNode& n = ctx.node(id);
    os << "  n" << raw(id) << " [label=\"" << escape(label_of(n, opts.show_values))
       << "\", fillcolor=\"" << fill_color(n.origin) << "\"];\n";
  }
  for (NodeId id : nodes) {
    for (const auto& [key, in] : ctx.node(id).inputs)
      os << "  n" << raw(id) << " -> n" << raw(in) << " [label=\"" << escape(key) << "\"];\n";
  }
  for (const auto& [from, to] : result_edges)
    os << "  n" << raw(from) << " -> n" << raw(to) << " [style=dashed, color=blue];\n";
  os << "}\n";
  return os.str();
}

}  // namespace dflow
