#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "reactor/event_algebra.hpp"
#include "reactor/event_model.hpp"

namespace reactor {

/// Which of several candidate occurrences sharing a terminator fire.
enum class SelectionPolicy { First, Last, All };

/// Whether component events stay available after contributing to a firing.
enum class ConsumptionPolicy { Single, Multiple };

std::string_view to_string(SelectionPolicy p) noexcept;
std::string_view to_string(ConsumptionPolicy p) noexcept;

struct DetectorConfig {
  SelectionPolicy selection = SelectionPolicy::First;
  ConsumptionPolicy consumption = ConsumptionPolicy::Single;
  std::optional<Duration> window;
};

struct Detection {
  Occurrence occurrence;
  bool fired = true;
};

/// Orders candidates by (initiator time, initiator id) and keeps the
/// earliest (First), the latest (Last) or all of them.
std::vector<Occurrence> select_candidates(std::vector<Occurrence> candidates, SelectionPolicy p);

/// Incremental detector for one event expression.
///
/// Events are pushed in non-decreasing time order. Each operator node keeps
/// the occurrences its subtree has produced so far; a new event is inserted
/// at the matching leaves and only combinations that contain it are built on
/// the way up, so every candidate returned by feed() has the fed event as
/// its terminator. With {All, Multiple} and no window, the union of all
/// feed() results equals occurrences(expr, history).
///
/// With a window w no occurrence (partial or complete) spanning more than w
/// is ever built. Retained events are only dropped by expire(); callers that
/// run unbounded streams call it before each feed.
///
/// Single-writer: feed/consume/expire must not run concurrently.
class Detector {
 public:
  /// Throws Error(InvalidExpression) for a malformed expression or a
  /// non-positive window.
  Detector(EventExpr expr, DetectorConfig config);

  /// Fired detections whose terminator is `e`, after selection and
  /// consumption. Throws Error(OutOfOrderEvent) on time regression.
  std::vector<Detection> feed(const EventInstance& e);

  /// Under Single, removes the detection's components from the retained
  /// store and from every partial occurrence. Throws Error(StaleDetection)
  /// if a component is no longer retained. Multiple is a no-op.
  void consume(const Detection& fired, ConsumptionPolicy policy);

  /// Drops retained events older than `now - window` and the partial
  /// occurrences that reference them. Returns the number of events dropped.
  /// Throws Error(NoWindow) when no window is configured.
  std::size_t expire(TimePoint now);

  const EventExpr& expr() const { return expr_; }
  const DetectorConfig& config() const { return config_; }
  const std::map<EventId, EventInstance>& retained() const { return retained_; }

  /// Every candidate of the last feed(), in canonical order, flagged with
  /// whether it fired.
  std::span<const Detection> last_candidates() const { return last_candidates_; }

  /// Total partial occurrences held across operator nodes.
  std::size_t partial_count() const;

 private:
  struct Node {
    const ExprNode* def = nullptr;
    std::vector<std::size_t> children;
    std::vector<Occurrence> store;
    std::map<std::string, std::vector<Occurrence>> by_type;  // Any only
    bool keep_store = false;
  };

  std::size_t compile(const EventExpr& expr);
  std::vector<Occurrence> step(std::size_t index, const EventInstance& e);
  template <class Pred>
  void prune(Pred drop);

  EventExpr expr_;
  DetectorConfig config_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  std::set<std::string> relevant_types_;
  std::map<EventId, EventInstance> retained_;
  std::optional<TimePoint> last_time_;
  std::vector<Detection> last_candidates_;
};

}  // namespace reactor
