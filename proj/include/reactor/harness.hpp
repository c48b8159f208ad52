#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reactor/engine.hpp"

namespace reactor {

/// Parses line-delimited JSON event records
/// `{"type": "...", "time": N, "payload": {...}}` (payload optional, scalar
/// values only). Ids are assigned 1..n in line order; blank lines are
/// skipped but still counted for line numbers.
/// Throws Error with TraceParseError, OutOfOrderTrace or ReservedType,
/// carrying the 1-based line.
std::vector<EventInstance> load_trace(std::string_view text);

/// Timer events at t0 + p, t0 + 2p, ... <= t1, with ids from `first_id`.
/// Throws Error(InvalidPeriod) when p <= 0.
std::vector<EventInstance> synth_ticks(TimePoint t0, TimePoint t1, Duration period, EventId first_id = 1);

/// Merges ticks into a sorted trace; at equal times ticks come after
/// external events. Ids are renumbered 1..n in merged order.
std::vector<EventInstance> merge_ticks(std::span<const EventInstance> trace,
                                       std::span<const EventInstance> ticks);

struct RunOptions {
  std::optional<Duration> tick;
  std::size_t chain_limit = 1000;
};

struct RunReport {
  std::vector<ReactionRecord> records;
  std::vector<Fact> facts;  // sorted
  std::map<std::string, std::vector<Interval>> fluents;
  std::size_t events_dispatched = 0;
  bool journal_consistent = true;  // final KB equals journal replay
  std::optional<Error> error;

  std::size_t count(TxnOutcome outcome) const;

  /// Line-delimited JSON: one line per reaction record, then a summary
  /// object. Canonical: identical reports serialize to identical bytes.
  std::string serialize() const;
};

/// Replays the trace (plus timer ticks over [first time, last time] when a
/// tick period is set) through a fresh engine. An engine error stops the
/// replay; the report keeps everything up to that point and the error.
RunReport run_replay(const RuleSet& rules, std::span<const EventInstance> trace, const RunOptions& opts);

/// Canonical JSON text of an event, as used in reports.
std::string event_json(const EventInstance& e);

}  // namespace reactor
