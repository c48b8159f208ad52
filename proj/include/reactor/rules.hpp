#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "reactor/detection.hpp"
#include "reactor/event_algebra.hpp"
#include "reactor/fluent_store.hpp"
#include "reactor/knowledge_base.hpp"

namespace reactor {

/// `?name`: a condition variable bound by a fact lookup.
struct VarRef {
  std::string name;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

/// `?var.field`: a payload field of the event bound to `var`.
struct FieldRef {
  std::string var;
  std::string field;
  friend bool operator==(const FieldRef&, const FieldRef&) = default;
};

using Term = std::variant<Value, VarRef, FieldRef>;

std::string to_string(const Term& t);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op) noexcept;

struct Comparison {
  Term lhs;
  CmpOp op = CmpOp::Eq;
  Term rhs;
};

/// `fact(name, terms...)`, or its negation-as-failure when `negated`.
struct FactLookup {
  std::string name;
  std::vector<Term> args;
  bool negated = false;
};

/// `holds(fluent)` at the detection's terminator time.
struct HoldsCheck {
  std::string fluent;
};

using ConditionAtom = std::variant<Comparison, FactLookup, HoldsCheck>;

/// Conjunction, evaluated left to right.
struct Condition {
  std::vector<ConditionAtom> atoms;
};

/// One fact argument. The optional label names the field that carries the
/// value in the payload of the resulting assert:/retract: event; unlabelled
/// arguments are carried as `arg<index>`.
struct TemplateArg {
  std::optional<std::string> label;
  Term value;
};

struct FactTemplate {
  std::string name;
  std::vector<TemplateArg> args;
};

struct AssertAction {
  FactTemplate fact;
};
struct RetractAction {
  FactTemplate fact;
};
struct EmitAction {
  EventTypeId type;
  std::vector<std::pair<std::string, Term>> fields;
};
struct NoopAction {};

using Action = std::variant<AssertAction, RetractAction, EmitAction, NoopAction>;

/// Event type an action can raise, if any.
std::optional<std::string> raised_type(const Action& a);

std::string to_string(const Action& a);

struct Rule {
  std::string id;
  EventExpr on;
  std::optional<Condition> where{};
  std::vector<Action> actions{};
  std::optional<Condition> post{};
  SelectionPolicy selection = SelectionPolicy::First;
  ConsumptionPolicy consumption = ConsumptionPolicy::Single;
  std::optional<Duration> window{};

  DetectorConfig detector_config() const { return {selection, consumption, window}; }
};

struct RuleSet {
  std::vector<Rule> rules;
  std::vector<EffectRule> effects;
  std::set<Fact> facts;  // initial knowledge base
};

/// Parses rule-DSL source: `rule`, `effect` and `fact` statements, `#`
/// comments. Throws Error with SyntaxError (line/column), DuplicateRuleId,
/// UnboundVariable, InvalidExpression or DuplicateEffect.
RuleSet parse_rules(std::string_view text);

/// Parses a bare event expression in rule-DSL syntax.
EventExpr parse_event_expr(std::string_view text);

}  // namespace reactor
