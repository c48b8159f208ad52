#pragma once

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "reactor/event_model.hpp"

namespace reactor {

enum class EffectMode { Initiates, Terminates };

std::string_view to_string(EffectMode m) noexcept;

struct EffectRule {
  EventTypeId type;
  EffectMode mode = EffectMode::Initiates;
  std::string fluent;

  friend auto operator<=>(const EffectRule& a, const EffectRule& b) {
    return std::tie(a.type.name, a.mode, a.fluent) <=> std::tie(b.type.name, b.mode, b.fluent);
  }
  friend bool operator==(const EffectRule&, const EffectRule&) = default;
};

// Minimal interval event calculus over propositional fluents.
//
// A fluent holds on [t_init, t_term): it starts holding at an initiating
// event and stops at the instant of a terminating one. When both happen at
// the same instant, termination wins. Intervals returned by
// fluent_intervals() use the same half-open reading; an open end means the
// fluent still holds.
class FluentHistory {
 public:
  struct Entry {
    EventInstance event;
    std::vector<EffectRule> effects;
  };

  /// Throws Error(DuplicateEffect) if the triple is already declared.
  void declare_effect(const EventTypeId& type, EffectMode mode, const std::string& fluent);

  /// Records the event if any declared effect applies to its type.
  /// Throws Error(OutOfOrderEvent) if (time, id) does not advance.
  void append(const EventInstance& e);

  /// Unknown fluents never hold.
  bool holds_at(const std::string& fluent, TimePoint t) const;

  /// Maximal disjoint validity intervals in time order.
  std::vector<Interval> fluent_intervals(const std::string& fluent) const;

  /// Every fluent named by a declared effect, sorted.
  std::vector<std::string> fluents() const;

  const std::set<EffectRule>& effects() const { return effects_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::set<EffectRule> effects_;
  std::vector<Entry> entries_;
  bool any_appended_ = false;
  TimePoint last_time_;
  EventId last_id_ = 0;
};

}  // namespace reactor
