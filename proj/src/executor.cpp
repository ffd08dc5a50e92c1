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

#include "dflow/executor.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace dflow {

using Kind = EngineException::Kind;

EngineError::EngineError(EngineException e) : info_(std::move(e)) {
  what_ = std::string(to_string(info_.kind)) + ": " + info_.prompt;
}

void raise(Kind kind, std::string prompt, std::optional<std::string> slot,
           std::optional<TypeTag> expected) {
  EngineException e;
  e.kind = kind;
  e.prompt = std::move(prompt);
  e.slot = std::move(slot);
  e.expected = std::move(expected);
  throw EngineError(std::move(e));
}

// ---------------------------------------------------------------------------
// CallFrame

CallFrame::CallFrame(DialogueContext& ctx, NodeId id,
                     std::vector<std::pair<std::string, Value>> args)
    : ctx_(ctx), id_(id), args_(std::move(args)) {}

const Value* CallFrame::arg(std::string_view key) const {
  for (const auto& [k, v] : args_)
    if (k == key) return &v;
  return nullptr;
}

std::vector<const Value*> CallFrame::variadic(std::string_view param) const {
  std::vector<const Value*> out;
  for (const auto& [k, v] : args_)
    if (param_of(k) == param && k != param) out.push_back(&v);
  return out;
}

namespace {

NodeId add_value_node(DialogueContext& ctx, const Value& v, int turn) {
  GraphNode n;
  n.func = "#" + v.tag().str();
  n.constant = v;
  n.result = v;
  n.type_tag = v.tag();
  n.origin = Origin::Db;
  n.turn_index = turn;
  return ctx.add_node(std::move(n));
}

}  // namespace

NodeId CallFrame::materialize(const Value& v) {
  NodeId n = add_value_node(ctx_, v, node().turn_index);
  link_result(n);
  return n;
}

void CallFrame::link_result(NodeId target) {
  ctx_.node(target);
  ctx_.node(id_).result_node = target;
}

// ---------------------------------------------------------------------------
// Constraint evaluation

namespace {

struct FieldDecl {
  TypeTag::Kind owner;
  const char* name;
};

// Leaf fields; "attendee" tests set membership, the rest test equality.
constexpr FieldDecl kLeafFields[] = {
    {TypeTag::Kind::Event, "id"},         {TypeTag::Kind::Event, "subject"},
    {TypeTag::Kind::Event, "start"},      {TypeTag::Kind::Event, "end"},
    {TypeTag::Kind::Event, "start_date"}, {TypeTag::Kind::Event, "start_time"},
    {TypeTag::Kind::Event, "attendee"},   {TypeTag::Kind::Recipient, "id"},
    {TypeTag::Kind::Recipient, "name"},   {TypeTag::Kind::Recipient, "manager"},
};

bool values_match(const Value& a, const Value& b) {
  if (auto sa = a.get_if<std::string>())
    if (auto sb = b.get_if<std::string>()) return iequals(*sa, *sb);
  return a == b;
}

}  // namespace

bool valid_field(const TypeTag& inner, std::string_view field) {
  if (field == "value") return true;
  for (const auto& f : kLeafFields)
    if (f.name == field && (inner.is_any() || inner.kind() == f.owner)) return true;
  return false;
}

std::optional<Value> read_field(const Value& obj, std::string_view field, const StubDb& db) {
  if (field == "value") return obj;
  const auto* ref = obj.get_if<EntityRef>();
  if (!ref) return std::nullopt;
  if (ref->kind == EntityKind::Event) {
    const Event* e = db.event(ref->id);
    if (!e) return std::nullopt;
    if (field == "id") return Value(e->id);
    if (field == "subject") return Value(e->subject);
    if (field == "start") return Value(e->start);
    if (field == "end") return Value(e->end);
    if (field == "start_date") return Value(e->start.date());
    if (field == "start_time") return Value(e->start.time());
    if (field == "attendees") return Value(make_set(EntityKind::Recipient, e->attendees));
    return std::nullopt;
  }
  const Person* p = db.person(ref->id);
  if (!p) return std::nullopt;
  if (field == "id") return Value(p->id);
  if (field == "name") return Value(p->name);
  if (field == "manager") {
    if (!p->manager_id) return std::nullopt;
    return Value(EntityRef{EntityKind::Recipient, *p->manager_id});
  }
  return std::nullopt;
}

bool satisfies(const Constraint& c, const Value& value, const StubDb& db) {
  if (!compatible(c.inner, value.tag())) return false;
  switch (c.op) {
    case Constraint::Op::True:
      return true;
    case Constraint::Op::Leaf: {
      if (c.field == "attendee") {
        auto attendees = read_field(value, "attendees", db);
        const auto* who = c.operand.get_if<EntityRef>();
        if (!attendees || !who) return false;
        const auto& ids = attendees->as<EntitySet>().ids;
        return std::binary_search(ids.begin(), ids.end(), who->id);
      }
      auto v = read_field(value, c.field, db);
      return v && values_match(*v, c.operand);
    }
    case Constraint::Op::And:
      return std::all_of(c.children.begin(), c.children.end(),
                         [&](const Constraint& k) { return satisfies(k, value, db); });
    case Constraint::Op::Or:
      return std::any_of(c.children.begin(), c.children.end(),
                         [&](const Constraint& k) { return satisfies(k, value, db); });
    case Constraint::Op::Not:
      return !satisfies(c.children.front(), value, db);
  }
  return false;
}

std::vector<Value> query_db(const Constraint& c, const StubDb& db) {
  std::vector<Value> out;
  auto consider = [&](Value v) {
    if (satisfies(c, v, db)) out.push_back(std::move(v));
  };
  bool any = c.inner.is_any();
  if (any || c.inner.kind() == TypeTag::Kind::Event)
    for (const auto& e : db.events()) consider(EntityRef{EntityKind::Event, e.id});
  if (any || c.inner.kind() == TypeTag::Kind::Recipient)
    for (const auto& p : db.persons()) consider(EntityRef{EntityKind::Recipient, p.id});
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

class Evaluator {
 public:
  explicit Evaluator(DialogueContext& ctx) : ctx_(ctx) {}

  Value eval(NodeId id) {
    {
      GraphNode& n = ctx_.node(id);
      if (n.result) return *n.result;
      if (n.constant) {
        n.result = n.constant;
        return *n.result;
      }
    }
    const FunctionSpec* spec = ctx_.registry().find(ctx_.node(id).func);
    if (!spec || !spec->impl)
      throw std::logic_error("node " + std::to_string(raw(id)) + " calls unregistered function " +
                             ctx_.node(id).func);
    // Copy: evaluating inputs may grow the node table.
    auto inputs = ctx_.node(id).inputs;
    std::vector<std::pair<std::string, Value>> args;
    args.reserve(inputs.size());
    for (const auto& [key, in] : inputs) args.emplace_back(key, eval(in));
    try {
      for (const auto& [key, v] : args) {
        const ParamSpec* p = spec->param(param_of(key));
        if (p && !p->accepts_tag(v.tag())) {
          std::string want = p->accepts.empty() ? "any" : p->accepts.front().str();
          raise(Kind::TypeMismatch,
                spec->name + " expects " + want + " for " + p->name + ", got " + v.tag().str(),
                p->name, p->accepts.empty() ? std::nullopt : std::optional(p->accepts.front()));
        }
      }
      CallFrame frame(ctx_, id, std::move(args));
      Value out;
      try {
        out = spec->impl(frame);
      } catch (const std::invalid_argument& e) {
        raise(Kind::TypeMismatch, e.what());
      }
      ctx_.node(id).result = out;
      return out;
    } catch (const EngineError& e) {
      if (e.info().node) throw;
      EngineException info = e.info();
      info.node = id;
      throw EngineError(std::move(info));
    }
  }

 private:
  DialogueContext& ctx_;
};

}  // namespace

EvalResult evaluate(NodeId root, DialogueContext& ctx, const EvalOptions& opts) {
  ctx.node(root);
  StubDb before = ctx.db();
  EvalResult out;
  try {
    out.value = Evaluator(ctx).eval(root);
  } catch (const EngineError& e) {
    ctx.db() = std::move(before);
    out.error = e.info();
    if (!out.error->node) out.error->node = root;
    if (opts.record) {
      ctx.exceptions().push_back(*out.error);
      ctx.messages().push_back(out.error->prompt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// refer

namespace {

bool node_matches(const GraphNode& n, const Constraint& c, const StubDb& db) {
  if (!n.result) return false;
  if (!c.inner.is_any() && (n.type_tag.is_any() || !compatible(c.inner, n.type_tag)))
    return false;
  return satisfies(c, *n.result, db);
}

// Newest match among the turns' nodes, restricted to `allowed` when given.
std::optional<NodeId> search_graph(const Constraint& c, const DialogueContext& ctx,
                                   const std::function<bool(int, NodeId)>& allowed) {
  const auto& nodes = ctx.nodes();
  for (int t = static_cast<int>(ctx.turns().size()) - 1; t >= 0; --t) {
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
      if (it->turn_index != t) continue;
      if (allowed && !allowed(t, it->id)) continue;
      if (node_matches(*it, c, ctx.db())) return it->id;
    }
  }
  return std::nullopt;
}

// `exclude` holds the inputs of the refer node itself, which must not be
// found as their own referent.
NodeId refer_at(const Constraint& c, DialogueContext& ctx, bool fallback_db, int turn,
                const std::set<NodeId>* exclude = nullptr) {
  std::function<bool(int, NodeId)> allowed;
  if (exclude) allowed = [exclude](int, NodeId id) { return exclude->count(id) == 0; };
  if (auto hit = search_graph(c, ctx, allowed)) return *hit;
  if (fallback_db) {
    auto rows = query_db(c, ctx.db());
    if (rows.size() == 1) return add_value_node(ctx, rows.front(), turn);
    if (rows.size() > 1)
      raise(Kind::MultipleMatches,
            std::to_string(rows.size()) + " database entries match " + c.str() + "; which one?");
  }
  raise(Kind::NoMatch, "Nothing in the conversation matches " + c.str() + ".");
}

}  // namespace

NodeId refer(const Constraint& c, DialogueContext& ctx, const ReferOptions& opts) {
  return refer_at(c, ctx, opts.fallback_db, static_cast<int>(ctx.turns().size()) - 1);
}

// ---------------------------------------------------------------------------
// revise / resume

namespace {

TurnOutcome run_turn(NodeId root, DialogueContext& ctx) {
  ctx.append_turn(root);
  TurnOutcome out;
  out.root = root;
  out.result = evaluate(root, ctx);
  return out;
}

// Input keys of `consumer` that read from `producer`.
std::vector<std::string> slots_reading(const GraphNode& consumer, NodeId producer) {
  std::vector<std::string> out;
  for (const auto& [k, in] : consumer.inputs)
    if (in == producer) out.push_back(k);
  return out;
}

void check_slot(const DialogueContext& ctx, const GraphNode& consumer, const std::string& key,
                const TypeTag& actual) {
  const FunctionSpec* spec = ctx.registry().find(consumer.func);
  if (!spec) return;
  const ParamSpec* p = spec->param(param_of(key));
  if (p && !p->accepts_tag(actual))
    raise(Kind::TypeMismatch,
          "cannot use " + actual.str() + " for " + consumer.func + "." + p->name, p->name,
          p->accepts.empty() ? std::nullopt : std::optional(p->accepts.front()));
}

// Coercion chain every consumer of `producer` declares for `actual`, when
// none of them accepts `actual` directly and they all agree on one chain.
std::optional<std::vector<std::string>> shared_coercion(const DialogueContext& ctx,
                                                        const std::vector<NodeId>& closure,
                                                        NodeId producer, const TypeTag& actual) {
  std::optional<std::vector<std::string>> chain;
  for (NodeId id : closure) {
    const GraphNode& consumer = ctx.node(id);
    for (const auto& key : slots_reading(consumer, producer)) {
      const FunctionSpec* spec = ctx.registry().find(consumer.func);
      const ParamSpec* p = spec ? spec->param(param_of(key)) : nullptr;
      if (!p || p->accepts_tag(actual)) return std::nullopt;
      const auto* c = ctx.registry().coercion(consumer.func, p->name, actual);
      if (!c || (chain && *chain != *c)) return std::nullopt;
      chain = *c;
    }
  }
  return chain;
}

std::string and_key(const GraphNode& n) {
  std::size_t count = 0;
  for (const auto& [k, in] : n.inputs)
    if (param_of(k) == "constraints") ++count;
  return "constraints." + std::to_string(count);
}

}  // namespace

TurnOutcome revise(const Constraint& old_spec, const Expr& new_subexpr, ReviseMode mode,
                   DialogueContext& ctx) {
  if (ctx.turns().empty()) raise(Kind::NoMatch, "There is nothing to revise yet.");
  // Candidates are nodes feeding some turn root; per-turn closure cached.
  std::map<int, std::set<NodeId>> closures;
  auto in_turn_graph = [&](int t, NodeId id) {
    auto it = closures.find(t);
    if (it == closures.end()) {
      auto r = reachable(ctx, ctx.turns()[static_cast<std::size_t>(t)]);
      it = closures.emplace(t, std::set<NodeId>(r.begin(), r.end())).first;
    }
    return it->second.count(id) > 0;
  };
  auto hit = search_graph(old_spec, ctx, in_turn_graph);
  if (!hit) raise(Kind::NoMatch, "Nothing in the conversation matches " + old_spec.str() + ".");
  NodeId matched = *hit;
  int turn = ctx.node(matched).turn_index;
  NodeId source_root = ctx.turns()[static_cast<std::size_t>(turn)];

  Expr replacement_expr = new_subexpr;
  TypeTag new_tag = infer_type(new_subexpr, ctx.registry());
  TypeTag old_tag = ctx.node(matched).type_tag;
  std::vector<NodeId> closure = reachable(ctx, source_root);
  if (mode == ReviseMode::Replace) {
    if (auto chain = shared_coercion(ctx, closure, matched, new_tag)) {
      for (const auto& fn : *chain) {
        Expr wrapped = Expr::call(fn, {std::move(replacement_expr)});
        wrapped.synthesized = true;
        replacement_expr = std::move(wrapped);
      }
      new_tag = infer_type(replacement_expr, ctx.registry());
    }
  }
  if (mode == ReviseMode::ExtendAnd) {
    if (old_tag.kind() != TypeTag::Kind::Constraint)
      raise(Kind::TypeMismatch, "extend_and needs a constraint, found " + old_tag.str());
    if (new_tag.kind() != TypeTag::Kind::Constraint || !unify(old_tag, new_tag))
      raise(Kind::TypeMismatch,
            "cannot conjoin " + new_tag.str() + " with " + old_tag.str(), std::nullopt, old_tag);
  } else {
    for (NodeId id : closure) {
      const GraphNode& consumer = ctx.node(id);
      for (const auto& key : slots_reading(consumer, matched))
        check_slot(ctx, consumer, key, new_tag);
    }
  }

  Duplicate dup = duplicate_subgraph_mapped(source_root, ctx);
  int new_turn = ctx.next_turn_index();
  NodeId copy = dup.copies.at(matched);
  NodeId built = build_detached(replacement_expr, ctx, new_turn, Origin::Annotated);
  NodeId replacement = built;
  if (mode == ReviseMode::ExtendAnd) {
    if (ctx.node(copy).func == "AND") {
      GraphNode& target = ctx.node(copy);
      std::string key = and_key(target);
      target.inputs.emplace_back(key, built);
      if (auto u = unify(target.type_tag, new_tag)) target.type_tag = *u;
      replacement = copy;
    } else {
      GraphNode n;
      n.func = "AND";
      n.inputs = {{"constraints.0", copy}, {"constraints.1", built}};
      n.type_tag = *unify(old_tag, new_tag);
      n.origin = Origin::Revision;
      n.turn_index = new_turn;
      replacement = ctx.add_node(std::move(n));
    }
  }
  NodeId root = dup.root;
  if (replacement != copy) {
    for (const auto& [orig, c] : dup.copies) {
      GraphNode& n = ctx.node(c);
      for (auto& [k, in] : n.inputs)
        if (in == copy) in = replacement;
    }
    if (root == copy) root = replacement;
  }
  check_acyclic(ctx, root);
  return run_turn(root, ctx);
}

TurnOutcome resume_exception(const Expr& value_expr, DialogueContext& ctx) {
  if (ctx.exceptions().empty()) throw NoPendingException();
  const EngineException pending = ctx.exceptions().back();
  if (pending.kind != Kind::MissingValue || !pending.slot || !pending.node)
    throw NoPendingException(std::string("pending exception is ") + to_string(pending.kind) +
                             ", not a missing value");
  TypeTag tag = infer_type(value_expr, ctx.registry());
  if (pending.expected && !compatible(*pending.expected, tag))
    raise(Kind::TypeMismatch,
          "expected " + pending.expected->str() + " for " + *pending.slot + ", got " + tag.str(),
          pending.slot, pending.expected);

  int turn = ctx.node(*pending.node).turn_index;
  if (turn < 0 || turn >= static_cast<int>(ctx.turns().size()))
    throw NoPendingException("suspended node is not part of any turn");
  Duplicate dup = duplicate_subgraph_mapped(ctx.turns()[static_cast<std::size_t>(turn)], ctx);
  auto it = dup.copies.find(*pending.node);
  if (it == dup.copies.end())
    throw NoPendingException("suspended node is not part of its turn graph");
  NodeId value = build_detached(value_expr, ctx, ctx.next_turn_index(), Origin::Annotated);

  GraphNode& target = ctx.node(it->second);
  std::erase_if(target.inputs, [&](const auto& kv) { return kv.first == *pending.slot; });
  target.inputs.emplace_back(*pending.slot, value);
  if (const FunctionSpec* spec = ctx.registry().find(target.func)) {
    auto rank = [&](const std::string& key) {
      auto p = param_of(key);
      for (std::size_t i = 0; i < spec->params.size(); ++i)
        if (spec->params[i].name == p) return i;
      return spec->params.size();
    };
    std::stable_sort(target.inputs.begin(), target.inputs.end(),
                     [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });
  }
  ctx.exceptions().pop_back();
  return run_turn(dup.root, ctx);
}

Value evaluate_scratch(const Expr& e, DialogueContext& ctx) {
  NodeId root = build_detached(e, ctx, -1, Origin::Annotated);
  EvalResult r = evaluate(root, ctx, EvalOptions{false});
  if (!r.ok()) throw EngineError(*r.error);
  return *r.value;
}

// ---------------------------------------------------------------------------
// Core operators

namespace {

TypeTag constraint_any() { return TypeTag::constraint(TypeTag::Kind::Any); }
TypeTag set_any() { return TypeTag::set_of(TypeTag::Kind::Any); }

ParamSpec param(std::string name, std::vector<TypeTag> accepts, bool required = true,
                bool variadic = false) {
  return ParamSpec{std::move(name), std::move(accepts), required, variadic};
}

TypeTag inner_or_any(const TypeTag* t) {
  if (t && t->has_inner()) return t->inner();
  return TypeTag::Kind::Any;
}

// Unified Constraint tag over all variadic inputs.
TypeTag combined_constraint(const ArgTypes& a) {
  TypeTag out = constraint_any();
  for (const auto& [k, t] : a.tags) {
    auto u = unify(out, t);
    if (u) out = *u;
  }
  return out;
}

std::vector<Constraint> constraint_args(const CallFrame& f, std::string_view param) {
  std::vector<Constraint> cs;
  for (const Value* v : f.variadic(param)) cs.push_back(*v->as<ConstraintPtr>());
  return cs;
}

Value element(const EntitySet& s, std::size_t i) { return EntityRef{s.kind, s.ids[i]}; }

}  // namespace

void register_core(FunctionRegistry& registry) {
  registry.add({"AND",
                {param("constraints", {constraint_any()}, true, true)},
                combined_constraint,
                [](CallFrame& f) -> Value {
                  return share(Constraint::all_of(constraint_args(f, "constraints")));
                },
                false, false, false, "Conjunction of one or more constraints."});
  registry.add({"OR",
                {param("constraints", {constraint_any()}, true, true)},
                combined_constraint,
                [](CallFrame& f) -> Value {
                  return share(Constraint::any_of(constraint_args(f, "constraints")));
                },
                false, false, false, "Disjunction of one or more constraints."});
  registry.add({"NOT",
                {param("constraint", {constraint_any()})},
                [](const ArgTypes& a) {
                  const TypeTag* t = a.find("constraint");
                  return t ? *t : constraint_any();
                },
                [](CallFrame& f) -> Value {
                  return share(Constraint::negate(*f.arg("constraint")->as<ConstraintPtr>()));
                },
                false, false, false, "Negation of a constraint."});
  registry.add({"do",
                {param("steps", {}, true, true)},
                [](const ArgTypes& a) {
                  const TypeTag* last = nullptr;
                  for (const auto& [k, tag] : a.tags)
                    if (param_of(k) == "steps") last = &tag;
                  return last ? *last : TypeTag(TypeTag::Kind::Unit);
                },
                [](CallFrame& f) -> Value { return *f.variadic("steps").back(); },
                false, false, false, "Runs its steps in order; the value of the last one."});
  registry.add({"singleton",
                {param("set", {set_any()})},
                [](const ArgTypes& a) { return inner_or_any(a.find("set")); },
                [](CallFrame& f) -> Value {
                  const auto& s = f.arg("set")->as<EntitySet>();
                  if (s.ids.empty())
                    raise(Kind::NoMatch, std::string("No matching ") + to_string(s.kind) + " found.");
                  if (s.ids.size() > 1)
                    raise(Kind::MultipleMatches, std::to_string(s.ids.size()) + " " +
                                                     to_string(s.kind) +
                                                     " entries match; which one do you mean?");
                  return element(s, 0);
                },
                false, false, false, "The sole element of a set."});
  registry.add({"size",
                {param("set", {set_any()})},
                [](const ArgTypes&) { return TypeTag(TypeTag::Kind::Int); },
                [](CallFrame& f) -> Value {
                  return static_cast<std::int64_t>(f.arg("set")->as<EntitySet>().ids.size());
                },
                false, false, false, "Number of elements of a set."});
  registry.add({"get_attr",
                {param("obj", {}), param("field", {TypeTag::Kind::Text})},
                [](const ArgTypes&) { return TypeTag(TypeTag::Kind::Any); },
                [](CallFrame& f) -> Value {
                  const auto& field = f.arg("field")->as<std::string>();
                  const Value& obj = *f.arg("obj");
                  auto v = read_field(obj, field, f.ctx().db());
                  if (!v || field == "value")
                    raise(Kind::DomainError,
                          obj.tag().str() + " has no readable field " + field + ".");
                  return *v;
                },
                false, false, false, "Projects a declared field of an entity."});
  registry.add({"of_type",
                {param("type", {TypeTag::Kind::Text})},
                [](const ArgTypes& a) {
                  if (a.call && !a.call->args.empty() && a.call->args[0].is_literal())
                    if (auto t = TypeTag::parse(a.call->args[0].name)) return TypeTag::constraint(*t);
                  return constraint_any();
                },
                [](CallFrame& f) -> Value {
                  const auto& name = f.arg("type")->as<std::string>();
                  auto t = TypeTag::parse(name);
                  if (!t) raise(Kind::DomainError, "unknown type " + name);
                  return share(Constraint::any(*t));
                },
                false, false, false, "Constraint satisfied by every object of a type."});
  registry.add({"value_is",
                {param("value", {})},
                [](const ArgTypes& a) {
                  const TypeTag* t = a.find("value");
                  return TypeTag::constraint(t ? *t : TypeTag(TypeTag::Kind::Any));
                },
                [](CallFrame& f) -> Value {
                  const Value& v = *f.arg("value");
                  return share(Constraint::leaf(v.tag(), "value", v));
                },
                false, false, false, "Constraint satisfied by objects equal to a value."});
  registry.add({"refer",
                {param("constraint", {constraint_any()})},
                [](const ArgTypes& a) { return inner_or_any(a.find("constraint")); },
                [](CallFrame& f) -> Value {
                  const auto& c = *f.arg("constraint")->as<ConstraintPtr>();
                  auto closure = reachable(f.ctx(), f.id());
                  std::set<NodeId> own(closure.begin(), closure.end());
                  NodeId hit = refer_at(c, f.ctx(), f.ctx().options.fallback_db,
                                        f.node().turn_index, &own);
                  f.link_result(hit);
                  return *f.ctx().node(hit).result;
                },
                false, false, false, "Most recent salient object satisfying a constraint."});
}

}  // namespace dflow
