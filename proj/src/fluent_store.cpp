#include "reactor/fluent_store.hpp"

#include <algorithm>

#include "reactor/error.hpp"

namespace reactor {

std::string_view to_string(EffectMode m) noexcept {
  return m == EffectMode::Initiates ? "initiates" : "terminates";
}

void FluentHistory::declare_effect(const EventTypeId& type, EffectMode mode, const std::string& fluent) {
  if (!effects_.insert(EffectRule{type, mode, fluent}).second) {
    throw Error(ErrorCode::DuplicateEffect,
                type.name + " " + std::string(to_string(mode)) + " " + fluent);
  }
}

void FluentHistory::append(const EventInstance& e) {
  if (any_appended_ && std::tie(e.time, e.id) <= std::tie(last_time_, last_id_)) {
    throw Error(ErrorCode::OutOfOrderEvent,
                "fluent history requires (time, id) order at event " + std::to_string(e.id));
  }
  any_appended_ = true;
  last_time_ = e.time;
  last_id_ = e.id;

  std::vector<EffectRule> matched;
  for (const auto& rule : effects_) {
    if (rule.type == e.type) matched.push_back(rule);
  }
  if (!matched.empty()) entries_.push_back(Entry{e, std::move(matched)});
}

namespace {

bool affects(const FluentHistory::Entry& entry, const std::string& fluent, EffectMode mode) {
  return std::any_of(entry.effects.begin(), entry.effects.end(), [&](const EffectRule& r) {
    return r.mode == mode && r.fluent == fluent;
  });
}

}  // namespace

bool FluentHistory::holds_at(const std::string& fluent, TimePoint t) const {
  // Walk back from t one instant at a time; the most recent instant that
  // touches the fluent decides, and a termination at that instant wins.
  auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                             [](TimePoint v, const Entry& e) { return v < e.event.time; });
  while (it != entries_.begin()) {
    const TimePoint instant = std::prev(it)->event.time;
    bool init = false;
    while (it != entries_.begin() && std::prev(it)->event.time == instant) {
      --it;
      if (affects(*it, fluent, EffectMode::Terminates)) return false;
      init = init || affects(*it, fluent, EffectMode::Initiates);
    }
    if (init) return true;
  }
  return false;
}

std::vector<Interval> FluentHistory::fluent_intervals(const std::string& fluent) const {
  std::vector<Interval> out;
  bool holding = false;
  TimePoint since;
  for (std::size_t i = 0; i < entries_.size();) {
    const TimePoint now = entries_[i].event.time;
    bool init = false;
    bool term = false;
    for (; i < entries_.size() && entries_[i].event.time == now; ++i) {
      init = init || affects(entries_[i], fluent, EffectMode::Initiates);
      term = term || affects(entries_[i], fluent, EffectMode::Terminates);
    }
    if (term) {
      if (holding) out.push_back(Interval::closed(since, now));
      holding = false;
    } else if (init && !holding) {
      holding = true;
      since = now;
    }
  }
  if (holding) out.push_back(Interval::open_from(since));
  return out;
}

std::vector<std::string> FluentHistory::fluents() const {
  std::set<std::string> names;
  for (const auto& r : effects_) names.insert(r.fluent);
  return {names.begin(), names.end()};
}

}  // namespace reactor
