#include "reactor/harness.hpp"

#include <algorithm>

#include "json.hpp"

namespace reactor {

using nlohmann::json;

namespace {

Value scalar_from_json(const json& j, std::size_t line, const std::string& field) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  throw Error(ErrorCode::TraceParseError, "payload field '" + field + "' is not a scalar", line);
}

json value_to_json(const Value& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

json payload_to_json(const Payload& p) {
  json out = json::object();
  for (const auto& [k, v] : p) out[k] = value_to_json(v);
  return out;
}

json event_to_json(const EventInstance& e) {
  return json{{"id", e.id}, {"type", e.type.name}, {"time", e.time.value}, {"payload", payload_to_json(e.payload)}};
}

json interval_to_json(const Interval& i) {
  return json::array({i.start.value, i.end ? json(i.end->value) : json(nullptr)});
}

json record_to_json(const ReactionRecord& r) {
  json bindings = json::object();
  for (const auto& [var, ev] : r.occurrence.bindings) bindings["?" + var] = ev.id;
  json vars = json::object();
  for (const auto& [var, v] : r.bindings) vars["?" + var] = value_to_json(v);
  json produced = json::array();
  for (const auto& e : r.produced) produced.push_back(event_to_json(e));
  json out{
      {"kind", "reaction"},
      {"rule", r.rule_id},
      {"trigger", {{"id", r.trigger.id}, {"type", r.trigger.type.name}, {"time", r.trigger.time.value}}},
      {"occurrence",
       {{"interval", interval_to_json(r.occurrence.interval)},
        {"components", r.occurrence.components},
        {"initiator", r.occurrence.initiator_id},
        {"terminator", r.occurrence.terminator_id},
        {"events", bindings}}},
      {"bindings", vars},
      {"actions", r.actions},
      {"outcome", to_string(r.outcome)},
      {"produced", produced},
      {"depth", r.depth},
  };
  if (!r.error.empty()) out["error"] = r.error;
  return out;
}

}  // namespace

std::string event_json(const EventInstance& e) { return event_to_json(e).dump(); }

std::vector<EventInstance> load_trace(std::string_view text) {
  std::vector<EventInstance> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::optional<TimePoint> last;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& err) {
      throw Error(ErrorCode::TraceParseError, err.what(), line_no);
    }
    if (!j.is_object()) throw Error(ErrorCode::TraceParseError, "record is not an object", line_no);
    if (!j.contains("type") || !j["type"].is_string() || j["type"].get<std::string>().empty()) {
      throw Error(ErrorCode::TraceParseError, "missing string field 'type'", line_no);
    }
    if (!j.contains("time") || !j["time"].is_number_integer() || j["time"].get<std::int64_t>() < 0) {
      throw Error(ErrorCode::TraceParseError, "field 'time' must be a non-negative integer", line_no);
    }
    EventTypeId type(j["type"].get<std::string>());
    if (type.reserved()) {
      throw Error(ErrorCode::ReservedType, "event type '" + type.name + "' is reserved", line_no);
    }
    const TimePoint time{j["time"].get<std::int64_t>()};
    if (last && time < *last) {
      throw Error(ErrorCode::OutOfOrderTrace,
                  "time " + std::to_string(time.value) + " precedes " + std::to_string(last->value), line_no);
    }
    last = time;
    Payload payload;
    if (j.contains("payload")) {
      const json& p = j["payload"];
      if (!p.is_object()) throw Error(ErrorCode::TraceParseError, "'payload' must be an object", line_no);
      for (const auto& [k, v] : p.items()) payload.emplace(k, scalar_from_json(v, line_no, k));
    }
    out.push_back(make_event(std::move(type), time, std::move(payload), out.size() + 1));
    if (end == text.size()) break;
  }
  return out;
}

std::vector<EventInstance> synth_ticks(TimePoint t0, TimePoint t1, Duration period, EventId first_id) {
  if (period <= 0) throw Error(ErrorCode::InvalidPeriod, "tick period must be positive");
  std::vector<EventInstance> out;
  for (TimePoint t = t0 + period; t <= t1; t = t + period) {
    out.push_back(make_event(EventTypeId::timer(), t, {}, first_id + out.size()));
  }
  return out;
}

std::vector<EventInstance> merge_ticks(std::span<const EventInstance> trace,
                                       std::span<const EventInstance> ticks) {
  std::vector<EventInstance> out;
  out.reserve(trace.size() + ticks.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < trace.size() || j < ticks.size()) {
    if (j == ticks.size() || (i < trace.size() && trace[i].time <= ticks[j].time)) {
      out.push_back(trace[i++]);
    } else {
      out.push_back(ticks[j++]);
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].id = k + 1;
  return out;
}

std::size_t RunReport::count(TxnOutcome outcome) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                [&](const ReactionRecord& r) { return r.outcome == outcome; }));
}

std::string RunReport::serialize() const {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  json facts_json = json::array();
  for (const auto& f : facts) {
    json args = json::array();
    for (const auto& a : f.args) args.push_back(value_to_json(a));
    facts_json.push_back(json{{"name", f.name}, {"args", args}});
  }
  json fluents_json = json::object();
  for (const auto& [name, intervals] : fluents) {
    json list = json::array();
    for (const auto& i : intervals) list.push_back(interval_to_json(i));
    fluents_json[name] = list;
  }
  json summary{
      {"kind", "summary"},
      {"records", records.size()},
      {"committed", count(TxnOutcome::Committed)},
      {"rolled_back", count(TxnOutcome::RolledBack)},
      {"aborted", count(TxnOutcome::Aborted)},
      {"events_dispatched", events_dispatched},
      {"facts", facts_json},
      {"fluents", fluents_json},
      {"journal_consistent", journal_consistent},
      {"error", error ? json(error->what()) : json(nullptr)},
  };
  out += summary.dump();
  out += '\n';
  return out;
}

RunReport run_replay(const RuleSet& rules, std::span<const EventInstance> trace, const RunOptions& opts) {
  if (opts.tick && *opts.tick <= 0) throw Error(ErrorCode::InvalidPeriod, "tick period must be positive");
  std::vector<EventInstance> stream(trace.begin(), trace.end());
  if (opts.tick && !trace.empty()) {
    stream = merge_ticks(trace, synth_ticks(trace.front().time, trace.back().time, *opts.tick));
  }

  Engine engine(rules, EngineOptions{opts.chain_limit});
  RunReport report;
  for (const auto& e : stream) {
    auto result = engine.dispatch(e);
    std::move(result.records.begin(), result.records.end(), std::back_inserter(report.records));
    if (result.error) {
      report.error = std::move(result.error);
      break;
    }
  }
  report.facts.assign(engine.kb().facts().begin(), engine.kb().facts().end());
  report.journal_consistent = engine.kb().replay() == engine.kb().facts();
  for (const auto& fluent : engine.fluents().fluents()) {
    report.fluents[fluent] = engine.fluents().fluent_intervals(fluent);
  }
  report.events_dispatched = engine.events_dispatched();
  return report;
}

}  // namespace reactor
