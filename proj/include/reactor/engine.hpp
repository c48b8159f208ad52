#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reactor/detection.hpp"
#include "reactor/error.hpp"
#include "reactor/fluent_store.hpp"
#include "reactor/knowledge_base.hpp"
#include "reactor/rules.hpp"

namespace reactor {

/// Event context of a firing: events bound by the rule's event expression
/// plus condition variables bound by fact lookups.
struct Bindings {
  std::map<std::string, EventInstance> events;
  std::map<std::string, Value> variables;
};

/// Every extension of `b` that satisfies the conjunction, ordered by the
/// variable values and without duplicates. An absent condition yields `b`
/// alone. Throws Error(MissingField) when a referenced payload field or
/// event binding is missing.
std::vector<Bindings> evaluate_condition(const std::optional<Condition>& condition, const Bindings& b,
                                         const KnowledgeBase& kb, TimePoint at,
                                         const FluentHistory& fluents);

enum class TxnOutcome { Committed, RolledBack, Aborted };

std::string_view to_string(TxnOutcome o) noexcept;

struct TxnResult {
  TxnOutcome outcome = TxnOutcome::Committed;
  /// Instantiated action texts, in execution order.
  std::vector<std::string> actions;
  /// assert:/retract: events for effective updates and emitted events, in
  /// action order, timestamped `at` and not yet given ids. Empty unless
  /// committed.
  std::vector<EventInstance> events;
};

/// Runs the actions against the knowledge base as one transaction, then
/// checks the postcondition on the resulting state. Re-asserting a present
/// fact or retracting an absent one changes nothing and raises no event.
/// An unsatisfiable postcondition rolls every update back.
/// Throws Error(TemplateError) if an action cannot be instantiated; the
/// transaction is rolled back first.
TxnResult apply_actions_txn(std::span<const Action> actions, const Bindings& b, KnowledgeBase& kb,
                            const std::optional<Condition>& post, const FluentHistory& fluents,
                            TimePoint at);

struct ReactionRecord {
  std::string rule_id;
  EventInstance trigger;  // the event whose dispatch completed the detection
  Occurrence occurrence;
  std::map<std::string, Value> bindings;  // condition solution
  std::vector<std::string> actions;
  TxnOutcome outcome = TxnOutcome::Committed;
  std::vector<EventInstance> produced;
  std::size_t depth = 0;
  std::string error;  // set when outcome is Aborted
};

struct DispatchResult {
  std::vector<ReactionRecord> records;
  std::optional<Error> error;  // records up to the failure are kept
};

struct EngineOptions {
  std::size_t chain_limit = 1000;
};

/// ECA(P) rule engine. Owns one detector per rule, the knowledge base and
/// the fluent history. Not reentrant; one logical thread per instance.
class Engine {
 public:
  explicit Engine(RuleSet rules, EngineOptions options = {});

  /// Pushes an event and everything it causes. The engine assigns ids in
  /// arrival order, overriding `e.id`. Internal events raised by committed
  /// firings are processed breadth-first at the same timestamp; an event of
  /// generation greater than the chain limit stops processing with
  /// ChainLimitExceeded. Time regressions yield OutOfOrderEvent.
  DispatchResult dispatch(EventInstance e);

  const RuleSet& rules() const { return rules_; }
  const KnowledgeBase& kb() const { return kb_; }
  const FluentHistory& fluents() const { return fluents_; }
  const Detector& detector(std::size_t rule_index) const { return detectors_.at(rule_index); }
  std::size_t events_dispatched() const { return dispatched_; }

 private:
  void react(std::size_t rule_index, const Detection& det, const EventInstance& trigger,
             std::size_t depth, std::deque<std::pair<EventInstance, std::size_t>>& queue,
             std::vector<ReactionRecord>& records);

  RuleSet rules_;
  EngineOptions options_;
  std::vector<Detector> detectors_;
  KnowledgeBase kb_;
  FluentHistory fluents_;
  EventId last_id_ = 0;
  std::optional<TimePoint> last_time_;
  std::size_t dispatched_ = 0;
};

/// Static termination analysis: rule r points at rule s when an action of r
/// raises an event type that appears as a leaf of s's event expression.
struct TriggeringGraph {
  std::vector<std::string> nodes;                          // rule ids, declaration order
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // sorted, unique
  /// Rules on a cycle, one entry per strongly connected component that
  /// contains a cycle (self-loops included), each in declaration order.
  std::vector<std::vector<std::string>> cycles;

  bool acyclic() const { return cycles.empty(); }
};

TriggeringGraph triggering_graph(const RuleSet& rules);

}  // namespace reactor
