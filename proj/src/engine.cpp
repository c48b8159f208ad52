#include "reactor/engine.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace reactor {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Resolves a term; nullopt for a variable that is not bound yet.
std::optional<Value> resolve(const Term& t, const Bindings& b, ErrorCode missing) {
  return std::visit(Overloaded{
                        [](const Value& v) -> std::optional<Value> { return v; },
                        [&](const VarRef& v) -> std::optional<Value> {
                          auto it = b.variables.find(v.name);
                          if (it == b.variables.end()) return std::nullopt;
                          return it->second;
                        },
                        [&](const FieldRef& f) -> std::optional<Value> {
                          auto ev = b.events.find(f.var);
                          if (ev == b.events.end()) {
                            throw Error(missing, "event binding ?" + f.var + " is not bound");
                          }
                          auto field = ev->second.payload.find(f.field);
                          if (field == ev->second.payload.end()) {
                            throw Error(missing, "event " + ev->second.type.name + " has no field '" +
                                                     f.field + "' (?" + f.var + "." + f.field + ")");
                          }
                          return field->second;
                        },
                    },
                    t);
}

Value resolve_bound(const Term& t, const Bindings& b, ErrorCode missing) {
  auto v = resolve(t, b, missing);
  if (!v) throw Error(missing, "variable " + to_string(t) + " is not bound");
  return *v;
}

bool compare(const Value& lhs, CmpOp op, const Value& rhs) {
  if (op == CmpOp::Eq) return values_equal(lhs, rhs);
  if (op == CmpOp::Ne) return !values_equal(lhs, rhs);
  auto ord = compare_values(lhs, rhs);
  if (!ord) return false;
  switch (op) {
    case CmpOp::Lt: return *ord < 0;
    case CmpOp::Le: return *ord <= 0;
    case CmpOp::Gt: return *ord > 0;
    case CmpOp::Ge: return *ord >= 0;
    default: return false;
  }
}

// Unifies lookup arguments with one fact; extends `b` on success.
bool unify(const FactLookup& lookup, const Fact& fact, Bindings& b) {
  if (fact.args.size() != lookup.args.size()) return false;
  for (std::size_t i = 0; i < fact.args.size(); ++i) {
    const Term& term = lookup.args[i];
    auto value = resolve(term, b, ErrorCode::MissingField);
    if (value) {
      if (!values_equal(*value, fact.args[i])) return false;
    } else {
      b.variables.emplace(std::get<VarRef>(term).name, fact.args[i]);
    }
  }
  return true;
}

void extend(const ConditionAtom& atom, const Bindings& b, const KnowledgeBase& kb, TimePoint at,
            const FluentHistory& fluents, std::vector<Bindings>& out) {
  std::visit(Overloaded{
                 [&](const Comparison& c) {
                   const Value lhs = resolve_bound(c.lhs, b, ErrorCode::MissingField);
                   const Value rhs = resolve_bound(c.rhs, b, ErrorCode::MissingField);
                   if (compare(lhs, c.op, rhs)) out.push_back(b);
                 },
                 [&](const FactLookup& lookup) {
                   bool any = false;
                   for (const Fact* fact : kb.facts_named(lookup.name)) {
                     Bindings candidate = b;
                     if (!unify(lookup, *fact, candidate)) continue;
                     any = true;
                     if (lookup.negated) break;
                     out.push_back(std::move(candidate));
                   }
                   if (lookup.negated && !any) out.push_back(b);
                 },
                 [&](const HoldsCheck& h) {
                   if (fluents.holds_at(h.fluent, at)) out.push_back(b);
                 },
             },
             atom);
}

}  // namespace

std::vector<Bindings> evaluate_condition(const std::optional<Condition>& condition, const Bindings& b,
                                         const KnowledgeBase& kb, TimePoint at,
                                         const FluentHistory& fluents) {
  std::vector<Bindings> solutions{b};
  if (!condition) return solutions;
  for (const auto& atom : condition->atoms) {
    std::vector<Bindings> next;
    for (const auto& s : solutions) extend(atom, s, kb, at, fluents, next);
    solutions = std::move(next);
    if (solutions.empty()) break;
  }
  std::sort(solutions.begin(), solutions.end(),
            [](const Bindings& x, const Bindings& y) { return x.variables < y.variables; });
  solutions.erase(std::unique(solutions.begin(), solutions.end(),
                              [](const Bindings& x, const Bindings& y) { return x.variables == y.variables; }),
                  solutions.end());
  return solutions;
}

std::string_view to_string(TxnOutcome o) noexcept {
  switch (o) {
    case TxnOutcome::Committed: return "committed";
    case TxnOutcome::RolledBack: return "rolled_back";
    case TxnOutcome::Aborted: return "aborted";
  }
  return "committed";
}

namespace {

struct Instantiated {
  Fact fact;
  Payload payload;
};

Instantiated instantiate(const FactTemplate& tpl, const Bindings& b) {
  Instantiated out{Fact{tpl.name, {}}, {}};
  for (std::size_t i = 0; i < tpl.args.size(); ++i) {
    Value v = resolve_bound(tpl.args[i].value, b, ErrorCode::TemplateError);
    out.payload.insert_or_assign(tpl.args[i].label.value_or("arg" + std::to_string(i)), v);
    out.fact.args.push_back(std::move(v));
  }
  return out;
}

}  // namespace

TxnResult apply_actions_txn(std::span<const Action> actions, const Bindings& b, KnowledgeBase& kb,
                            const std::optional<Condition>& post, const FluentHistory& fluents,
                            TimePoint at) {
  TxnResult result;
  auto txn = kb.begin();
  for (const auto& action : actions) {
    std::visit(Overloaded{
                   [&](const AssertAction& a) {
                     auto inst = instantiate(a.fact, b);
                     result.actions.push_back("assert(" + to_string(inst.fact) + ")");
                     if (txn.assert_fact(inst.fact)) {
                       result.events.push_back(
                           make_event(EventTypeId::asserted(a.fact.name), at, std::move(inst.payload), 0));
                     }
                   },
                   [&](const RetractAction& a) {
                     auto inst = instantiate(a.fact, b);
                     result.actions.push_back("retract(" + to_string(inst.fact) + ")");
                     if (txn.retract_fact(inst.fact)) {
                       result.events.push_back(
                           make_event(EventTypeId::retracted(a.fact.name), at, std::move(inst.payload), 0));
                     }
                   },
                   [&](const EmitAction& a) {
                     Payload payload;
                     std::string text = "emit(" + a.type.name + ", {";
                     for (std::size_t i = 0; i < a.fields.size(); ++i) {
                       Value v = resolve_bound(a.fields[i].second, b, ErrorCode::TemplateError);
                       if (i > 0) text += ", ";
                       text += a.fields[i].first + ": " + to_string(v);
                       payload.insert_or_assign(a.fields[i].first, std::move(v));
                     }
                     result.actions.push_back(text + "})");
                     result.events.push_back(make_event(a.type, at, std::move(payload), 0));
                   },
                   [&](const NoopAction&) { result.actions.emplace_back("noop"); },
               },
               action);
  }
  if (post && evaluate_condition(post, b, kb, at, fluents).empty()) {
    txn.rollback();
    result.outcome = TxnOutcome::RolledBack;
    result.events.clear();
    return result;
  }
  txn.commit();
  return result;
}

// ---------------------------------------------------------------------------

Engine::Engine(RuleSet rules, EngineOptions options)
    : rules_(std::move(rules)), options_(options), kb_(rules_.facts) {
  detectors_.reserve(rules_.rules.size());
  for (const auto& rule : rules_.rules) detectors_.emplace_back(rule.on, rule.detector_config());
  for (const auto& effect : rules_.effects) {
    fluents_.declare_effect(effect.type, effect.mode, effect.fluent);
  }
}

DispatchResult Engine::dispatch(EventInstance e) {
  DispatchResult result;
  if (last_time_ && e.time < *last_time_) {
    result.error = Error(ErrorCode::OutOfOrderEvent,
                         e.type.name + " at " + std::to_string(e.time.value) + " precedes " +
                             std::to_string(last_time_->value));
    return result;
  }
  last_time_ = e.time;
  e.id = ++last_id_;

  std::deque<std::pair<EventInstance, std::size_t>> queue;
  queue.emplace_back(std::move(e), 0);
  while (!queue.empty()) {
    auto [event, depth] = std::move(queue.front());
    queue.pop_front();
    if (depth > options_.chain_limit) {
      result.error = Error(ErrorCode::ChainLimitExceeded,
                           "chain depth " + std::to_string(depth) + " exceeds limit " +
                               std::to_string(options_.chain_limit) + " at " + event.type.name);
      break;
    }
    fluents_.append(event);
    ++dispatched_;
    for (std::size_t i = 0; i < detectors_.size(); ++i) {
      if (detectors_[i].config().window) detectors_[i].expire(event.time);
      for (const auto& det : detectors_[i].feed(event)) {
        react(i, det, event, depth, queue, result.records);
      }
    }
  }
  return result;
}

void Engine::react(std::size_t rule_index, const Detection& det, const EventInstance& trigger,
                   std::size_t depth, std::deque<std::pair<EventInstance, std::size_t>>& queue,
                   std::vector<ReactionRecord>& records) {
  const Rule& rule = rules_.rules[rule_index];
  auto base_record = [&] {
    ReactionRecord rec;
    rec.rule_id = rule.id;
    rec.trigger = trigger;
    rec.occurrence = det.occurrence;
    rec.depth = depth;
    return rec;
  };

  Bindings context{det.occurrence.bindings, {}};
  std::vector<Bindings> solutions;
  try {
    solutions = evaluate_condition(rule.where, context, kb_, det.occurrence.terminator_time, fluents_);
  } catch (const Error& err) {
    ReactionRecord rec = base_record();
    rec.outcome = TxnOutcome::Aborted;
    rec.error = err.what();
    records.push_back(std::move(rec));
    return;
  }

  for (const auto& solution : solutions) {
    ReactionRecord rec = base_record();
    rec.bindings = solution.variables;
    try {
      TxnResult txn = apply_actions_txn(rule.actions, solution, kb_, rule.post, fluents_, trigger.time);
      rec.outcome = txn.outcome;
      rec.actions = std::move(txn.actions);
      for (auto& produced : txn.events) {
        produced.id = ++last_id_;
        rec.produced.push_back(produced);
        queue.emplace_back(std::move(produced), depth + 1);
      }
    } catch (const Error& err) {
      rec.outcome = TxnOutcome::Aborted;
      rec.error = err.what();
    }
    records.push_back(std::move(rec));
  }
}

// ---------------------------------------------------------------------------

TriggeringGraph triggering_graph(const RuleSet& rules) {
  TriggeringGraph g;
  const std::size_t n = rules.rules.size();
  std::vector<std::set<std::string>> leaves(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes.push_back(rules.rules[i].id);
    leaves[i] = leaf_types(rules.rules[i].on);
  }
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) {
      const bool linked = std::any_of(rules.rules[r].actions.begin(), rules.rules[r].actions.end(),
                                      [&](const Action& a) {
                                        auto type = raised_type(a);
                                        return type && leaves[s].contains(*type);
                                      });
      if (linked) {
        g.edges.emplace_back(r, s);
        adj[r].push_back(s);
      }
    }
  }

  // Tarjan's strongly connected components.
  std::vector<int> index(n, -1);
  std::vector<int> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::function<void(std::size_t)> connect = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] < 0) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] != index[v]) return;
    std::vector<std::size_t> component;
    std::size_t w;
    do {
      w = stack.back();
      stack.pop_back();
      on_stack[w] = false;
      component.push_back(w);
    } while (w != v);
    const bool self_loop = std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
    if (component.size() > 1 || self_loop) {
      std::sort(component.begin(), component.end());
      std::vector<std::string> names;
      for (std::size_t c : component) names.push_back(g.nodes[c]);
      g.cycles.push_back(std::move(names));
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) connect(v);
  }
  std::sort(g.cycles.begin(), g.cycles.end(), [&](const auto& a, const auto& b) {
    auto pos = [&](const std::string& id) {
      return std::find(g.nodes.begin(), g.nodes.end(), id) - g.nodes.begin();
    };
    return pos(a.front()) < pos(b.front());
  });
  return g;
}

}  // namespace reactor
