#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace reactor {

/// Span of time on the abstract timeline, in the same unit as TimePoint.
using Duration = std::int64_t;

/// Instant on an abstract integer timeline (milliseconds by convention).
struct TimePoint {
  std::int64_t value = 0;

  constexpr TimePoint() = default;
  constexpr explicit TimePoint(std::int64_t v) : value(v) {}

  friend constexpr auto operator<=>(TimePoint, TimePoint) = default;
};

constexpr TimePoint operator+(TimePoint t, Duration d) { return TimePoint{t.value + d}; }
constexpr TimePoint operator-(TimePoint t, Duration d) { return TimePoint{t.value - d}; }
constexpr Duration operator-(TimePoint a, TimePoint b) { return a.value - b.value; }

/// Closed interval [start, end]. An empty `end` means unbounded; only fluent
/// validity intervals use that form.
struct Interval {
  TimePoint start;
  std::optional<TimePoint> end;

  static constexpr Interval closed(TimePoint s, TimePoint e) { return {s, e}; }
  static constexpr Interval open_from(TimePoint s) { return {s, std::nullopt}; }

  constexpr bool bounded() const { return end.has_value(); }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

/// Smallest bounded interval containing both arguments.
/// Throws Error(UnboundedInterval) if either side is unbounded.
Interval interval_cover(const Interval& a, const Interval& b);

/// True iff a ends strictly before b starts. Simultaneity is never "before".
bool strictly_before(const Interval& a, const Interval& b);

enum class EventKind : std::uint8_t { External, InternalAssert, InternalRetract, Timer };

inline constexpr std::string_view kAssertPrefix = "assert:";
inline constexpr std::string_view kRetractPrefix = "retract:";
inline constexpr std::string_view kTimerType = "timer";

// Event types are compared by name; the kind is a function of the name
// ("assert:NAME", "retract:NAME", "timer" are reserved).
struct EventTypeId {
  std::string name;
  EventKind kind = EventKind::External;

  EventTypeId() = default;
  EventTypeId(std::string type_name);  // NOLINT(google-explicit-constructor)
  EventTypeId(const char* type_name) : EventTypeId(std::string(type_name)) {}

  static EventTypeId asserted(const std::string& fact_name);
  static EventTypeId retracted(const std::string& fact_name);
  static EventTypeId timer();

  bool reserved() const { return kind != EventKind::External; }

  friend bool operator==(const EventTypeId& a, const EventTypeId& b) { return a.name == b.name; }
  friend auto operator<=>(const EventTypeId& a, const EventTypeId& b) { return a.name <=> b.name; }
};

/// Scalar payload / fact value.
using Value = std::variant<std::string, std::int64_t, double, bool>;

/// Field name -> scalar. Ordered so that serialization is canonical.
using Payload = std::map<std::string, Value>;

/// Equality used for matching: integers and decimals compare numerically.
bool values_equal(const Value& a, const Value& b);

/// Three-way comparison for the ordering operators of conditions.
/// Returns nullopt when the two values are not mutually ordered
/// (e.g. a string against a number).
std::optional<std::partial_ordering> compare_values(const Value& a, const Value& b);

/// Rendering used in diagnostics and action descriptions: strings quoted.
std::string to_string(const Value& v);

using EventId = std::uint64_t;

/// An occurred atomic event, `occurs(type, time)` with its context payload.
struct EventInstance {
  EventId id = 0;
  EventTypeId type;
  TimePoint time;
  Payload payload;

  /// Atomic events are instantaneous: [time, time].
  Interval mvi() const { return Interval::closed(time, time); }
};

EventInstance make_event(EventTypeId type, TimePoint time, Payload payload, EventId id);

}  // namespace reactor
