#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "reactor/event_model.hpp"

namespace reactor {

struct ExprNode;

/// Immutable complex-event type definition. Cheap to copy (shared tree).
class EventExpr {
 public:
  explicit EventExpr(ExprNode node);

  const ExprNode& node() const { return *node_; }

 private:
  std::shared_ptr<const ExprNode> node_;
};

struct Atomic {
  EventTypeId type;
  std::optional<std::string> var;
};
struct Seq {
  EventExpr left, right;
};
struct And {
  EventExpr left, right;
};
struct Or {
  EventExpr left, right;
};
/// NOT(absent)[opener, closer]: opener then closer with no absent occurrence
/// lying strictly between them.
struct Not {
  EventExpr absent, opener, closer;
};
/// n instances of pairwise-distinct types drawn from `types`.
struct Any {
  std::size_t n = 1;
  std::vector<EventTypeId> types;
};
/// n pairwise component-disjoint occurrences of `of`. Inner bindings are dropped.
struct Times {
  std::size_t n = 1;
  EventExpr of;
};

struct ExprNode : std::variant<Atomic, Seq, And, Or, Not, Any, Times> {
  using variant::variant;
};

EventExpr make_atomic(EventTypeId type, std::optional<std::string> var = std::nullopt);
EventExpr make_seq(EventExpr left, EventExpr right);
EventExpr make_and(EventExpr left, EventExpr right);
EventExpr make_or(EventExpr left, EventExpr right);
EventExpr make_not(EventExpr absent, EventExpr opener, EventExpr closer);
EventExpr make_any(std::size_t n, std::vector<EventTypeId> types);
EventExpr make_times(std::size_t n, EventExpr of);

/// Throws Error(InvalidExpression) on: Any with n == 0, n > |types| or
/// duplicate types; Times with n == 0; a binding name used twice.
void validate(const EventExpr& expr);

/// Names of every event type the expression can react to (Atomic leaves and
/// Any type lists, absent branches included).
std::set<std::string> leaf_types(const EventExpr& expr);

/// Binding names introduced by the expression, in source order. Names under
/// Times are excluded since Times does not propagate bindings.
std::vector<std::string> bound_variables(const EventExpr& expr);

/// Rule-DSL rendering, e.g. `seq(a as ?x, times(2, b))`.
std::string to_string(const EventExpr& expr);

/// A detected complex event: its maximum validity interval (the cover of
/// every component's atomic interval), the bindings it carries and the ids of
/// its component events. The initiator is the earliest component by
/// (time, id), the terminator the latest; the rest are interiors.
struct Occurrence {
  Interval interval;
  std::map<std::string, EventInstance> bindings;
  std::vector<EventId> components;  // strictly ascending
  TimePoint initiator_time;
  TimePoint terminator_time;
  EventId initiator_id = 0;
  EventId terminator_id = 0;

  static Occurrence of_event(const EventInstance& e,
                             const std::optional<std::string>& var = std::nullopt);

  bool shares_component(const Occurrence& other) const;
  bool contains(EventId id) const;
};

/// Cover of both occurrences with unioned components and bindings.
/// Returns nullopt when both bind the same variable.
std::optional<Occurrence> merge(const Occurrence& a, const Occurrence& b);

/// Canonical order: (initiator time, initiator id, end, components, bindings).
/// Two occurrences are the same iff neither is canonically less.
bool canonical_less(const Occurrence& a, const Occurrence& b);
bool same_occurrence(const Occurrence& a, const Occurrence& b);

/// Sorts canonically and removes duplicates.
void canonicalize(std::vector<Occurrence>& occurrences);

/// Declarative interval-semantics evaluation over a complete history.
/// Brute force; the reference for the incremental detector.
/// Throws Error(UnsortedHistory) unless sorted by (time, id) with unique ids.
std::vector<Occurrence> occurrences(const EventExpr& expr, std::span<const EventInstance> history);

/// Result of point (terminator-time) semantics: the detection instant and
/// the component ids of the matched structure.
struct PointOccurrence {
  TimePoint time;
  std::vector<EventId> components;

  friend auto operator<=>(const PointOccurrence&, const PointOccurrence&) = default;
};

/// Point-based evaluation where every complex event is reduced to the time
/// of its terminator. Seq requires det(left) < det(right); Not forbids an
/// absent detection strictly between the two detection times.
std::vector<PointOccurrence> occurrences_point(const EventExpr& expr,
                                               std::span<const EventInstance> history);

}  // namespace reactor
