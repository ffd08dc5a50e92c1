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

#include "dflow/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dflow/calendar.hpp"
#include "dflow/dataset.hpp"
#include "dflow/executor.hpp"
#include "dflow/expansion.hpp"
#include "dflow/graph.hpp"
#include "json.hpp"

namespace dflow {

namespace {

// Input or usage problem reported with exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
  if (!out) throw UsageError("failed writing " + path);
}

std::string rules_dir() { return default_data_dir() + "/rules"; }

RuleSet read_rules(const std::string& path) {
  try {
    return parse_rules(read_file(path));
  } catch (const RuleSyntaxError& e) {
    throw UsageError(path + ":" + std::to_string(e.line()) + ": " + e.what());
  } catch (const UnboundVariable& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const DuplicateRuleName& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::vector<DatasetTurn> read_corpus(const std::string& path) {
  try {
    return load_jsonl(path);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  } catch (const MalformedRecord& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Fixture, clock and registry shared by the executing subcommands.
struct Session {
  FunctionRegistry registry = make_default_registry();
  StubDb db;
  DateTime clock = default_clock();
  RuleSet expand_rules;
};

struct SessionFlags {
  std::string fixture;
  std::string clock;
  std::string expand_rules;
};

void add_session_flags(CLI::App* cmd, SessionFlags& f) {
  cmd->add_option("--fixture", f.fixture, "Database fixture (JSON); default $DFLOW_FIXTURE");
  cmd->add_option("--clock", f.clock, "Reference instant, RFC 3339; default from the fixture");
  cmd->add_option("--expand-rules", f.expand_rules, "Expand-phase rule file");
}

Session open_session(const SessionFlags& f) {
  Session s;
  std::string path = f.fixture.empty() ? default_fixture_path() : f.fixture;
  std::string text = read_file(path);
  try {
    s.db = StubDb::parse(text);
  } catch (const FixtureError& e) {
    throw UsageError(path + ": " + e.what());
  }
  auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_object() && doc.contains("clock") && doc["clock"].is_string()) {
    auto c = parse_datetime(doc["clock"].get<std::string>());
    if (!c) throw UsageError(path + ": bad clock " + doc["clock"].dump());
    s.clock = *c;
  }
  if (!f.clock.empty()) {
    auto c = parse_datetime(f.clock);
    if (!c) throw UsageError("--clock is not an RFC 3339 date-time: " + f.clock);
    s.clock = *c;
  }
  s.expand_rules =
      read_rules(f.expand_rules.empty() ? rules_dir() + "/expand.rules" : f.expand_rules);
  return s;
}

RewriteOptions rewrite_options(const FunctionRegistry& registry) {
  RewriteOptions o;
  o.is_effectful = [&registry](std::string_view name) { return registry.is_effectful(name); };
  return o;
}

std::string render(const Value& v, const StubDb& db) {
  if (const auto* ref = v.get_if<EntityRef>()) {
    if (ref->kind == EntityKind::Event) {
      if (const Event* e = db.event(ref->id))
        return "event " + std::to_string(e->id) + " \"" + e->subject + "\" " +
               format_date(e->start.date()) + " " + format_time(e->start.time()) + "-" +
               format_time(e->end.time());
    } else if (const Person* p = db.person(ref->id)) {
      return p->name + " (person " + std::to_string(p->id) + ")";
    }
    return v.str();
  }
  if (const auto* set = v.get_if<EntitySet>()) {
    if (set->ids.empty()) return "{}";
    std::string out = "{";
    for (std::size_t i = 0; i < set->ids.size(); ++i) {
      if (i) out += "; ";
      out += render(EntityRef{set->kind, set->ids[i]}, db);
    }
    return out + "}";
  }
  return v.str();
}

// Prints messages added since `mark` and the value, if any.
int report_turn(const EvalResult& r, const DialogueContext& ctx, std::size_t mark,
                std::ostream& out) {
  for (std::size_t i = mark; i < ctx.messages().size(); ++i) out << ctx.messages()[i] << "\n";
  if (!r.ok()) return kExitEngine;
  out << "=> " << render(*r.value, ctx.db()) << "\n";
  return kExitOk;
}

Expr prepare(const std::string& text, bool legacy, const Session& s) {
  Expr e = parse_any(text);
  if (legacy) return e;
  return expand(e, s.registry, s.expand_rules, rewrite_options(s.registry));
}

std::string syntax_message(const SyntaxError& e) {
  return "syntax error at position " + std::to_string(e.position()) + ": expected " +
         e.expected();
}

// Runs `body`, mapping library errors onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const SyntaxError& e) {
    err << "error: " << syntax_message(e) << "\n";
  } catch (const BuildError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
  } catch (const ExpansionError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const RewriteDivergence& e) {
    err << "error: " << e.what() << "\n";
  } catch (const FixtureError& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitUsage;
}

std::string quantile_label(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%g", q);
  return buf;
}

void print_stats(std::ostream& out, const std::vector<LengthStats>& rows) {
  if (rows.empty()) return;
  out << std::left << std::setw(12) << "style" << std::right << std::setw(6) << "n";
  for (const auto& [q, v] : rows.front().quantiles) out << std::setw(8) << quantile_label(q);
  out << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << to_string(r.style) << std::right << std::setw(6) << r.n;
    for (const auto& [q, v] : r.quantiles) out << std::setw(8) << v;
    out << "\n";
  }
}

std::vector<double> parse_quantiles(const std::string& text) {
  std::vector<double> qs;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      double q = std::stod(item, &used);
      if (used != item.size() || q < 0.0 || q > 1.0) throw std::invalid_argument(item);
      qs.push_back(q);
    } catch (const std::exception&) {
      throw UsageError("bad quantile '" + item + "' (expected numbers in [0, 1])");
    }
  }
  if (qs.empty()) throw UsageError("no quantiles given");
  return qs;
}

// ---------------------------------------------------------------------------
// Subcommands

struct SimplifyFlags {
  std::string in, rules, out;
};

int cmd_simplify(const SimplifyFlags& f, std::ostream& out, std::ostream& err) {
  auto turns = read_corpus(f.in);
  RuleSet rules = read_rules(f.rules.empty() ? rules_dir() + "/simplify.rules" : f.rules);
  FunctionRegistry registry = make_default_registry();
  SimplifySummary summary = simplify_dataset(turns, rules, rewrite_options(registry));
  std::ostream& table = f.out.empty() ? err : out;
  if (f.out.empty()) out << to_jsonl(turns);
  else write_file(f.out, to_jsonl(turns));
  for (const auto& t : turns)
    if (t.error) err << t.id() << ": " << *t.error << "\n";
  if (!turns.empty()) {
    std::vector<DatasetTurn> done;
    for (const auto& t : turns)
      if (t.simplified) done.push_back(t);
    if (!done.empty())
      print_stats(table, {length_quantiles(done, Style::Original, {0.25, 0.5, 0.75}),
                          length_quantiles(done, Style::Simplified, {0.25, 0.5, 0.75})});
  }
  return summary.failed ? kExitPartial : kExitOk;
}

struct ExecFlags {
  SessionFlags session;
  std::string expr, file, context;
  bool legacy = false;
  bool fallback_db = false;
};

DialogueContext open_context(const Session& s, const std::string& path) {
  if (!path.empty()) {
    std::ifstream probe(path);
    if (probe) {
      try {
        return restore_snapshot(read_file(path), s.registry);
      } catch (const FixtureError& e) {
        throw UsageError(path + ": " + e.what());
      }
    }
  }
  return DialogueContext(s.registry, s.db, s.clock);
}

int cmd_exec(const ExecFlags& f, std::ostream& out) {
  if (f.expr.empty() == f.file.empty()) throw UsageError("give exactly one of --expr or --file");
  Session s = open_session(f.session);
  DialogueContext ctx = open_context(s, f.context);
  if (f.fallback_db || f.legacy) ctx.options.fallback_db = true;
  Expr e = prepare(f.expr.empty() ? read_file(f.file) : f.expr, f.legacy, s);
  std::size_t mark = ctx.messages().size();
  EvalResult r = evaluate(build_graph(e, ctx), ctx);
  int code = report_turn(r, ctx, mark, out);
  if (!f.context.empty()) write_file(f.context, snapshot_json(ctx));
  return code;
}

struct VizFlags {
  SessionFlags session;
  std::string expr, out;
  bool hide_results = false;
  bool no_exec = false;
  bool legacy = false;
};

int cmd_viz(const VizFlags& f, std::ostream& out) {
  Session s = open_session(f.session);
  DialogueContext ctx(s.registry, s.db, s.clock);
  ctx.options.fallback_db = f.legacy;
  NodeId root = build_graph(prepare(f.expr, f.legacy, s), ctx);
  int code = kExitOk;
  if (!f.no_exec && !evaluate(root, ctx).ok()) code = kExitEngine;
  DotOptions opts;
  opts.hide_results = f.hide_results;
  std::string dot = emit_dot(ctx, root, opts);
  if (f.out.empty()) out << dot;
  else write_file(f.out, dot);
  return code;
}

struct StatsFlags {
  std::string in, rules, quantiles = "0.25,0.5,0.75";
};

int cmd_stats(const StatsFlags& f, std::ostream& out) {
  auto qs = parse_quantiles(f.quantiles);
  auto turns = read_corpus(f.in);
  if (turns.empty()) throw UsageError(f.in + " holds no turns");
  bool missing = std::any_of(turns.begin(), turns.end(),
                             [](const DatasetTurn& t) { return !t.simplified; });
  if (missing) {
    RuleSet rules = read_rules(f.rules.empty() ? rules_dir() + "/simplify.rules" : f.rules);
    FunctionRegistry registry = make_default_registry();
    simplify_dataset(turns, rules, rewrite_options(registry));
    for (const auto& t : turns)
      if (!t.simplified) throw UsageError(t.id() + ": " + t.error.value_or("not simplified"));
  }
  print_stats(out, {length_quantiles(turns, Style::Original, qs),
                    length_quantiles(turns, Style::Simplified, qs)});
  return kExitOk;
}

struct CheckFlags {
  SessionFlags session;
  std::string in, rules, report;
};

int cmd_check(const CheckFlags& f, std::ostream& out) {
  Session s = open_session(f.session);
  auto turns = read_corpus(f.in);
  // Turns that carry a simplified form keep it; the rest are simplified here.
  std::vector<DatasetTurn> pending;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < turns.size(); ++i)
    if (!turns[i].simplified) {
      pending.push_back(turns[i]);
      where.push_back(i);
    }
  if (!pending.empty()) {
    RuleSet rules = read_rules(f.rules.empty() ? rules_dir() + "/simplify.rules" : f.rules);
    simplify_dataset(pending, rules, rewrite_options(s.registry));
    for (std::size_t k = 0; k < pending.size(); ++k) turns[where[k]] = pending[k];
  }
  EquivalenceOptions opts;
  opts.clock = s.clock;
  opts.expand_rules = s.expand_rules;
  opts.rewrite = rewrite_options(s.registry);
  EquivalenceReport report = execution_equivalence(turns, s.registry, s.db, opts);
  if (!f.report.empty()) write_file(f.report, report.to_jsonl());

  std::size_t width = 8;
  for (const auto& v : report.verdicts) width = std::max(width, v.turn_id.size() + 2);
  out << std::left << std::setw(static_cast<int>(width)) << "turn" << std::setw(10) << "verdict"
      << "detail\n";
  for (const auto& v : report.verdicts)
    out << std::left << std::setw(static_cast<int>(width)) << v.turn_id << std::setw(10)
        << v.verdict() << v.detail << "\n";
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.3f", report.match_rate);
  out << "equal " << report.count(TurnVerdict::Kind::Equal) << ", differ "
      << report.count(TurnVerdict::Kind::Differ) << ", error "
      << report.count(TurnVerdict::Kind::Error) << "; match rate " << rate << "\n";
  bool all = !report.verdicts.empty() &&
             report.count(TurnVerdict::Kind::Equal) == report.verdicts.size();
  return all ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// REPL

struct ReplFlags {
  SessionFlags session;
  bool legacy = false;
  bool fallback_db = false;
  std::string prompt = "> ";
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class Repl {
 public:
  Repl(const ReplFlags& f, Session& s, std::ostream& out, std::ostream& err)
      : flags_(f), s_(s), ctx_(s.registry, s.db, s.clock), out_(out), err_(err) {
    ctx_.options.fallback_db = f.fallback_db || f.legacy;
  }

  int run(std::istream& in) {
    std::string line;
    while (true) {
      out_ << flags_.prompt << std::flush;
      if (!std::getline(in, line)) break;
      line = trim(line);
      if (line.empty()) continue;
      if (line == ":quit" || line == ":q") return kExitOk;
      step(line);
    }
    out_ << "\n";
    return kExitOk;
  }

 private:
  void step(const std::string& line) {
    try {
      if (line.rfind(":viz", 0) == 0) return viz(trim(line.substr(4)));
      if (line[0] == ':') {
        err_ << "error: unknown command " << line << " (commands: :viz N, :quit)\n";
        return;
      }
      Expr e = parse_any(line);
      std::size_t mark = ctx_.messages().size();
      if (e.is_call("revise")) return show(revise_turn(e), mark);
      if (e.is_call("resume")) {
        if (e.args.size() != 1 || !e.named.empty())
          throw UsageError("resume takes exactly one expression");
        return show(resume_exception(prepare_expr(e.args[0]), ctx_).result, mark);
      }
      if (e.is_literal() && pending_missing_value())
        return show(resume_exception(e, ctx_).result, mark);
      Expr ready = prepare_expr(e);
      show(evaluate(build_graph(ready, ctx_), ctx_), mark);
    } catch (const EngineError& e) {
      out_ << e.info().prompt << "\n";
    } catch (const NoPendingException& e) {
      err_ << "error: " << e.what() << "\n";
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << "\n";
    } catch (const SyntaxError& e) {
      err_ << "error: " << syntax_message(e) << "\n";
    } catch (const BuildError& e) {
      err_ << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    } catch (const ExpansionError& e) {
      err_ << "error: " << e.what() << "\n";
    } catch (const RewriteDivergence& e) {
      err_ << "error: " << e.what() << "\n";
    }
  }

  Expr prepare_expr(const Expr& e) {
    if (flags_.legacy) return e;
    return expand(e, s_.registry, s_.expand_rules, rewrite_options(s_.registry));
  }

  bool pending_missing_value() const {
    return !ctx_.exceptions().empty() &&
           ctx_.exceptions().back().kind == EngineException::Kind::MissingValue;
  }

  EvalResult revise_turn(const Expr& e) {
    if (e.args.size() != 2) throw UsageError("revise(OLD, NEW[, mode=replace|extend_and])");
    ReviseMode mode = ReviseMode::Replace;
    for (const auto& [k, v] : e.named) {
      if (k != "mode") throw UsageError("revise has no option '" + k + "'");
      if (v.name == "replace") mode = ReviseMode::Replace;
      else if (v.name == "extend_and") mode = ReviseMode::ExtendAnd;
      else throw UsageError("revise mode must be replace or extend_and");
    }
    Value old = evaluate_scratch(prepare_expr(e.args[0]), ctx_);
    const auto* c = old.get_if<ConstraintPtr>();
    if (!c) throw UsageError("the first argument of revise must be a constraint");
    return revise(**c, prepare_expr(e.args[1]), mode, ctx_).result;
  }

  void show(const EvalResult& r, std::size_t mark) { report_turn(r, ctx_, mark, out_); }

  void viz(const std::string& arg) {
    int n = 0;
    try {
      n = std::stoi(arg);
    } catch (const std::exception&) {
      throw UsageError(":viz needs a turn number");
    }
    if (n < 0 || n >= static_cast<int>(ctx_.turns().size()))
      throw UsageError("no turn " + arg + " (" + std::to_string(ctx_.turns().size()) +
                       " turns so far)");
    out_ << emit_dot(ctx_, ctx_.turns()[static_cast<std::size_t>(n)]);
  }

  const ReplFlags& flags_;
  Session& s_;
  DialogueContext ctx_;
  std::ostream& out_;
  std::ostream& err_;
};

int cmd_repl(const ReplFlags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  Session s = open_session(f.session);
  return Repl(f, s, out, err).run(in);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Dataflow dialogue engine: simplify, expand and execute annotations."};
  app.name("dflow");
  app.require_subcommand(1);

  SimplifyFlags sf;
  auto* simplify = app.add_subcommand("simplify", "Rewrite a corpus into simplified annotations");
  simplify->add_option("--in", sf.in, "Input corpus (JSONL)")->required();
  simplify->add_option("--rules", sf.rules, "Simplify-phase rule file");
  simplify->add_option("--out", sf.out, "Output JSONL; default standard output");

  ExecFlags ef;
  auto* exec = app.add_subcommand("exec", "Execute one expression");
  exec->add_option("--expr", ef.expr, "Expression text");
  exec->add_option("--file", ef.file, "File holding the expression");
  exec->add_option("--context", ef.context, "Context snapshot to resume from and save to");
  exec->add_flag("--legacy", ef.legacy, "Original vocabulary: no expansion, refer may use the DB");
  exec->add_flag("--fallback-db", ef.fallback_db, "Let refer fall back to the database");
  add_session_flags(exec, ef.session);

  ReplFlags rf;
  auto* repl = app.add_subcommand("repl", "Interactive multi-turn session");
  repl->add_flag("--legacy", rf.legacy, "Original vocabulary: no expansion");
  repl->add_flag("--fallback-db", rf.fallback_db, "Let refer fall back to the database");
  repl->add_option("--prompt", rf.prompt, "Prompt text");
  add_session_flags(repl, rf.session);

  StatsFlags stf;
  auto* stats = app.add_subcommand("stats", "Token-length quantiles of a corpus");
  stats->add_option("--in", stf.in, "Corpus (JSONL)")->required();
  stats->add_option("--rules", stf.rules, "Rules for turns lacking a simplified form");
  stats->add_option("--quantiles", stf.quantiles, "Comma-separated quantiles");

  CheckFlags cf;
  auto* check = app.add_subcommand("check", "Execution equivalence of original and simplified");
  check->add_option("--in", cf.in, "Corpus (JSONL)")->required();
  check->add_option("--rules", cf.rules, "Rules for turns lacking a simplified form");
  check->add_option("--report", cf.report, "Per-turn verdicts (JSONL)");
  add_session_flags(check, cf.session);

  VizFlags vf;
  auto* viz = app.add_subcommand("viz", "Render an expression's graph as DOT");
  viz->add_option("--expr", vf.expr, "Expression text")->required();
  viz->add_option("--out", vf.out, "DOT output; default standard output");
  viz->add_flag("--hide-results", vf.hide_results, "Omit execution-result edges");
  viz->add_flag("--no-exec", vf.no_exec, "Render without executing");
  viz->add_flag("--legacy", vf.legacy, "Original vocabulary: no expansion");
  add_session_flags(viz, vf.session);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << app.help();
    return kExitUsage;
  }

  if (simplify->parsed()) return guarded(err, [&] { return cmd_simplify(sf, out, err); });
  if (exec->parsed()) return guarded(err, [&] { return cmd_exec(ef, out); });
  if (repl->parsed()) return guarded(err, [&] { return cmd_repl(rf, in, out, err); });
  if (stats->parsed()) return guarded(err, [&] { return cmd_stats(stf, out); });
  if (check->parsed()) return guarded(err, [&] { return cmd_check(cf, out); });
  if (viz->parsed()) return guarded(err, [&] { return cmd_viz(vf, out); });
  return kExitUsage;
}

}  // namespace dflow
