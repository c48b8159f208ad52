#include "reactor/event_model.hpp"

#include <cmath>
#include <sstream>

#include "reactor/error.hpp"

namespace reactor {

Interval interval_cover(const Interval& a, const Interval& b) {
  if (!a.bounded() || !b.bounded()) {
    throw Error(ErrorCode::UnboundedInterval, "cover requires bounded intervals");
  }
  return Interval::closed(std::min(a.start, b.start), std::max(*a.end, *b.end));
}

bool strictly_before(const Interval& a, const Interval& b) {
  if (!a.bounded() || !b.bounded()) {
    throw Error(ErrorCode::UnboundedInterval, "ordering requires bounded intervals");
  }
  return *a.end < b.start;
}

namespace {

bool starts_with(const std::string& s, std::string_view prefix) {
  return s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace

EventTypeId::EventTypeId(std::string type_name) : name(std::move(type_name)) {
  if (starts_with(name, kAssertPrefix)) {
    kind = EventKind::InternalAssert;
  } else if (starts_with(name, kRetractPrefix)) {
    kind = EventKind::InternalRetract;
  } else if (name == kTimerType) {
    kind = EventKind::Timer;
  }
}

EventTypeId EventTypeId::asserted(const std::string& fact_name) {
  return EventTypeId(std::string(kAssertPrefix) + fact_name);
}

EventTypeId EventTypeId::retracted(const std::string& fact_name) {
  return EventTypeId(std::string(kRetractPrefix) + fact_name);
}

EventTypeId EventTypeId::timer() { return EventTypeId(std::string(kTimerType)); }

namespace {

std::optional<double> as_number(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

}  // namespace

bool values_equal(const Value& a, const Value& b) {
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
  }
  auto na = as_number(a);
  auto nb = as_number(b);
  if (na && nb) return *na == *nb;
  return a == b;
}

std::optional<std::partial_ordering> compare_values(const Value& a, const Value& b) {
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    return std::get<std::int64_t>(a) <=> std::get<std::int64_t>(b);
  }
  auto na = as_number(a);
  auto nb = as_number(b);
  if (na && nb) return *na <=> *nb;
  if (a.index() != b.index()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&a)) {
    return std::partial_ordering(*s <=> std::get<std::string>(b));
  }
  return std::get<bool>(a) <=> std::get<bool>(b);
}

std::string to_string(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          std::string out = "\"";
          for (char c : x) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
          }
          return out + "\"";
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          std::ostringstream os;
          os.precision(17);
          os << x;
          std::string s = os.str();
          if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
          return s;
        } else {
          return std::to_string(x);
        }
      },
      v);
}

EventInstance make_event(EventTypeId type, TimePoint time, Payload payload, EventId id) {
  return EventInstance{id, std::move(type), time, std::move(payload)};
}

}  // namespace reactor
