// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "reactor/harness.hpp"
#include "support/generators.hpp"
#include "support/rule_sets.hpp"

using namespace reactor;
using reactor::testing::ev;
using reactor::testing::keys;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool ok = true;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      note = what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

using Spans = std::vector<std::pair<std::int64_t, std::int64_t>>;

Spans spans(const std::vector<Detection>& ds) {
  Spans out;
  for (const auto& d : ds) out.emplace_back(d.occurrence.interval.start.value, d.occurrence.interval.end->value);
  return out;
}

std::vector<std::vector<EventInstance>> criterion_histories() {
  std::mt19937_64 rng(1);
  std::vector<std::vector<EventInstance>> out;
  for (int i = 0; i < 1000; ++i) out.push_back(testing::random_history(rng, 12, 4));
  return out;
}

Verdict oracle_equivalence() {
  Verdict v;
  std::mt19937_64 rng(7);
  testing::ExprGenerator gen(rng, 4);
  const auto t0 = Clock::now();
  std::size_t nonempty = 0;
  for (const auto& h : criterion_histories()) {
    const EventExpr expr = gen(3);
    Detector d(expr, {SelectionPolicy::All, ConsumptionPolicy::Multiple, std::nullopt});
    std::vector<Occurrence> fed;
    for (const auto& e : h) {
      for (auto& det : d.feed(e)) fed.push_back(std::move(det.occurrence));
    }
    const auto expected = keys(occurrences(expr, h));
    if (!expected.empty()) ++nonempty;
    v.require(keys(fed) == expected, "mismatch on " + to_string(expr));
  }
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, "took " + std::to_string(secs) + " s");
  if (v.ok) {
    std::ostringstream os;
    os << "1000 trials, " << nonempty << " with occurrences, " << secs << " s";
    v.note = os.str();
  }
  return v;
}

Verdict anomaly() {
  Verdict v;
  const std::vector<EventInstance> trace = {ev("B", 1, 1), ev("A", 2, 2), ev("C", 3, 3)};
  const auto a = make_atomic("A");
  const auto b = make_atomic("B");
  const auto c = make_atomic("C");
  const auto right = make_seq(a, make_seq(b, c));
  const auto left = make_seq(make_seq(a, b), c);

  const auto point_right = occurrences_point(right, trace);
  v.require(point_right.size() == 1 && point_right[0].time == TimePoint{3},
            "point semantics should detect seq(A, seq(B, C)) at 3");
  v.require(occurrences(right, trace).empty(), "interval semantics should reject B@1, A@2, C@3");
  v.require(occurrences_point(left, trace).empty(), "point semantics of seq(seq(A, B), C) should be empty");

  for (const auto& h : criterion_histories()) {
    v.require(keys(occurrences(right, h)) == keys(occurrences(left, h)), "interval seq not associative");
  }
  if (v.ok) v.note = "point {3} vs interval {}, point associativity broken, interval associative on 1000 histories";
  return v;
}

Verdict selection_matrix() {
  Verdict v;
  // hand simulation of the stream A@1, A@2, B@3, B@4 against seq(A, B)
  struct Case {
    SelectionPolicy sel;
    ConsumptionPolicy con;
    Spans at_b3;
    Spans at_b4;
  };
  const std::vector<Case> cases = {
      {SelectionPolicy::First, ConsumptionPolicy::Single, {{1, 3}}, {{2, 4}}},
      {SelectionPolicy::Last, ConsumptionPolicy::Single, {{2, 3}}, {{1, 4}}},
      {SelectionPolicy::All, ConsumptionPolicy::Multiple, {{1, 3}, {2, 3}}, {{1, 4}, {2, 4}}},
      {SelectionPolicy::First, ConsumptionPolicy::Multiple, {{1, 3}}, {{1, 4}}},
      {SelectionPolicy::Last, ConsumptionPolicy::Multiple, {{2, 3}}, {{2, 4}}},
  };
  const auto expr = make_seq(make_atomic("A"), make_atomic("B"));
  for (const auto& c : cases) {
    Detector d(expr, {c.sel, c.con, std::nullopt});
    const std::string label = std::string(to_string(c.sel)) + "/" + std::string(to_string(c.con));
    v.require(d.feed(ev("A", 1, 1)).empty() && d.feed(ev("A", 2, 2)).empty(), label + ": early detection");
    v.require(spans(d.feed(ev("B", 3, 3))) == c.at_b3, label + ": wrong detections at B@3");
    v.require(spans(d.feed(ev("B", 4, 4))) == c.at_b4, label + ": wrong detections at B@4");
  }
  if (v.ok) v.note = "first/single, last/single, all/multiple, first/multiple, last/multiple";
  return v;
}

std::size_t alerts_at(const std::vector<ReactionRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.outcome == TxnOutcome::Committed) {
      for (const auto& e : r.produced) n += e.type.name == "alert";
    }
  }
  return n;
}

std::size_t choose(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Verdict outages() {
  Verdict v;
  auto run = [](const std::string& policy) {
    Engine engine(parse_rules("rule r_alert: on times(4, outage) do emit(alert, {}) " + policy));
    std::vector<std::size_t> per_event;
    for (int t = 1; t <= 5; ++t) per_event.push_back(alerts_at(engine.dispatch(ev("outage", t, 0)).records));
    return per_event;
  };
  v.require(run("consume single") == std::vector<std::size_t>{0, 0, 0, 1, 0}, "single receive");
  v.require(run("select first consume multiple") == std::vector<std::size_t>{0, 0, 0, 1, 1},
            "multiple receive, select first");
  // at the 5th outage every 4-subset containing it is new: C(4, 3)
  v.require(run("select all consume multiple") == std::vector<std::size_t>{0, 0, 0, 1, choose(4, 3)},
            "multiple receive, select all");
  if (v.ok) v.note = "one alert at the 4th; 5th adds 0 (single), 1 (first, multiple), 4 (all, multiple)";
  return v;
}

const char* kCascadeRules =
    "rule r_close: on close as ?c do retract(dept(name: ?c.name))\n"
    "rule r_casc: on retract:dept as ?d where fact(emp, ?n, ?d.name) do retract(emp(?n, ?d.name))\n"
    "fact dept(sales)\nfact dept(hr)\n"
    "fact emp(e1, sales)\nfact emp(e2, sales)\nfact emp(e3, hr)\n";

Verdict cascade() {
  Verdict v;
  const auto rs = parse_rules(kCascadeRules);
  Engine engine(rs);
  const auto res = engine.dispatch(ev("close", 1, 0, {{"name", std::string("sales")}}));
  v.require(!res.error, "dispatch failed");
  const std::set<Fact> expected = {Fact{"dept", {std::string("hr")}},
                                   Fact{"emp", {std::string("e3"), std::string("hr")}}};
  v.require(engine.kb().facts() == expected, "sales employees not removed");
  std::size_t casc = 0;
  for (const auto& r : res.records) casc += r.rule_id == "r_casc" && r.outcome == TxnOutcome::Committed;
  v.require(casc == 2, "expected two cascade firings");
  v.require(triggering_graph(rs).acyclic(), "cascade rules reported cyclic");
  if (v.ok) v.note = "both sales employees retracted by chaining, graph acyclic";
  return v;
}

std::size_t max_depth(const std::vector<ReactionRecord>& records) {
  std::size_t d = 0;
  for (const auto& r : records) d = std::max(d, r.depth);
  return d;
}

Verdict termination() {
  Verdict v;
  const auto cyclic = triggering_graph(parse_rules("rule r1: on a do assert(p)\nrule r2: on assert:p do emit(a, {})"));
  v.require(cyclic.cycles == std::vector<std::vector<std::string>>{{"r1", "r2"}}, "two-rule cycle not flagged");

  // each step retracts what it asserted, so no re-assert is ever a no-op
  const std::size_t limit = 50;
  Engine adversarial(parse_rules("fact p\nrule r0: on kick do retract(p)\n"
                                 "rule r1: on retract:p do assert(q), retract(q)\n"
                                 "rule r2: on retract:q do assert(p), retract(p)\n"),
                     EngineOptions{limit});
  const auto res = adversarial.dispatch(ev("kick", 0, 0));
  v.require(res.error && res.error->code() == ErrorCode::ChainLimitExceeded, "adversarial chain not aborted");
  v.require(max_depth(res.records) == limit, "abort not at the configured limit");

  std::mt19937_64 rng(3);
  std::size_t dispatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto rs = parse_rules(testing::random_acyclic_rules(rng, n));
    v.require(triggering_graph(rs).acyclic(), "generated rule set is cyclic");
    // generation d events can only come from rule d-1 or later
    Engine engine(rs, EngineOptions{n});
    for (int t = 0; t < 20; ++t) {
      const auto r = engine.dispatch(ev(rng() % 2 ? "x" : "y", t, 0));
      ++dispatches;
      v.require(!r.error, "acyclic rule set hit " + (r.error ? std::string(r.error->what()) : ""));
    }
  }
  if (v.ok) {
    v.note = "cycle [r1, r2] flagged, abort at depth " + std::to_string(limit) + ", " + std::to_string(dispatches) +
             " acyclic dispatches";
  }
  return v;
}

std::string facts_bytes(const KnowledgeBase& kb) {
  std::string out;
  for (const auto& f : kb.facts()) out += to_string(f) + "\n";
  return out;
}

Verdict rollback() {
  Verdict v;
  Engine engine(parse_rules("fact stock(w1, 4)\nfact stock(w2, 0)\n"
                            "rule r_ship: on order as ?o do retract(stock(?o.item, 4)), assert(stock(?o.item, 3)),"
                            " assert(shipped(?o.item)) post fact(stock, ?o.item, 5)\n"));
  const std::string before = facts_bytes(engine.kb());
  const auto res = engine.dispatch(ev("order", 1, 0, {{"item", std::string("w1")}}));
  v.require(!res.error, "dispatch failed");
  v.require(res.records.size() == 1 && res.records[0].outcome == TxnOutcome::RolledBack, "expected a rollback");
  v.require(facts_bytes(engine.kb()) == before, "knowledge base changed");
  v.require(engine.kb().journal().empty() && engine.kb().replay() == engine.kb().facts(), "journal not clean");
  std::size_t produced = 0;
  for (const auto& r : res.records) produced += r.produced.size();
  v.require(produced == 0 && engine.events_dispatched() == 1, "internal events escaped");
  if (v.ok) v.note = "facts byte-identical, journal empty, 0 internal events";
  return v;
}

bool member(const std::vector<Interval>& ivs, TimePoint t) {
  for (const auto& iv : ivs) {
    if (iv.start <= t && (!iv.end || t < *iv.end)) return true;
  }
  return false;
}

Verdict fluents() {
  Verdict v;
  std::mt19937_64 rng(11);
  const std::vector<std::string> types = {"on", "off", "up", "down", "noise"};
  for (int trial = 0; trial < 100; ++trial) {
    FluentHistory fh;
    fh.declare_effect("on", EffectMode::Initiates, "f");
    fh.declare_effect("off", EffectMode::Terminates, "f");
    fh.declare_effect("up", EffectMode::Initiates, "g");
    fh.declare_effect("down", EffectMode::Terminates, "g");
    fh.declare_effect("up", EffectMode::Initiates, "f");
    std::vector<EventInstance> h;
    const std::size_t n = rng() % 21;
    std::int64_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
      t += static_cast<std::int64_t>(rng() % 3);
      h.push_back(ev(types[rng() % types.size()], t, i + 1));
      fh.append(h.back());
    }
    for (const std::string fluent : {"f", "g"}) {
      const auto ivs = fh.fluent_intervals(fluent);
      for (std::int64_t q = 0; q <= t + 2; ++q) {
        // some initiation at or before q with no termination from then through q
        bool naive = false;
        for (const auto& a : h) {
          if (a.time.value > q) continue;
          const bool init = a.type.name == (fluent == "f" ? "on" : "up") || (fluent == "f" && a.type.name == "up");
          if (!init) continue;
          bool killed = false;
          for (const auto& b : h) {
            const bool term = b.type.name == (fluent == "f" ? "off" : "down");
            killed |= term && b.time >= a.time && b.time.value <= q;
          }
          naive |= !killed;
        }
        const bool holds = fh.holds_at(fluent, TimePoint{q});
        v.require(holds == member(ivs, TimePoint{q}), "holds_at disagrees with fluent_intervals");
        v.require(holds == naive, "holds_at disagrees with direct enumeration");
      }
    }
  }
  FluentHistory fh;
  fh.declare_effect("start", EffectMode::Initiates, "f");
  fh.declare_effect("stop", EffectMode::Terminates, "f");
  fh.append(ev("start", 1, 1));
  fh.append(ev("stop", 5, 2));
  v.require(fh.fluent_intervals("f") == std::vector<Interval>{Interval::closed(TimePoint{1}, TimePoint{5})},
            "start@1/stop@5 interval");
  v.require(!fh.holds_at("f", TimePoint{0}) && fh.holds_at("f", TimePoint{1}) && fh.holds_at("f", TimePoint{4}) &&
                !fh.holds_at("f", TimePoint{5}),
            "start@1/stop@5 should hold exactly on [1,5)");
  if (v.ok) v.note = "100 histories agree at every integer time, start@1/stop@5 holds on [1,5)";
  return v;
}

const char* kThroughputRules =
    "effect A initiates armed\neffect D terminates armed\n"
    "rule r_pair: on seq(A as ?a, B) where holds(armed) do assert(seen(?a.k)) window 20\n"
    "rule r_burst: on times(3, C) do emit(burst, {}) window 5\n"
    "rule r_clear: on assert:seen as ?s where ?s.arg0 > 40 do retract(seen(?s.arg0))\n";

std::vector<EventInstance> throughput_trace(std::size_t n) {
  std::mt19937_64 rng(5);
  const char* types[] = {"A", "B", "C", "D", "E"};
  std::vector<EventInstance> trace;
  trace.reserve(n);
  std::int64_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t += static_cast<std::int64_t>(rng() % 3);
    trace.push_back(ev(types[rng() % 5], t, i + 1, {{"k", static_cast<std::int64_t>(rng() % 64)}}));
  }
  return trace;
}

Verdict throughput() {
  Verdict v;
  const auto rules = parse_rules(kThroughputRules);
  const auto trace = throughput_trace(100000);
  const auto t0 = Clock::now();
  const auto first = run_replay(rules, trace, RunOptions{});
  const double secs = seconds_since(t0);
  const auto first_text = first.serialize();
  const auto second_text = run_replay(rules, trace, RunOptions{}).serialize();
  v.require(!first.error, "replay stopped with an error");
  v.require(first_text == second_text, "reports differ");
  v.require(first.count(TxnOutcome::Committed) > 1000, "too few firings to be a meaningful load");
  v.require(secs < 10.0, "replay took " + std::to_string(secs) + " s");
  if (v.ok) {
    std::ostringstream os;
    os << "100000 events, " << first.records.size() << " records, " << first_text.size() << " bytes identical, "
       << secs << " s per replay";
    v.note = os.str();
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"anomaly reproduction", anomaly},
      {"selection/consumption matrix", selection_matrix},
      {"outages scenario", outages},
      {"cascade scenario", cascade},
      {"termination", termination},
      {"transactional rollback", rollback},
      {"fluent consistency", fluents},
      {"determinism and throughput", throughput},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.ok = false;
      v.note = std::string("threw: ") + e.what();
    }
    failed += !v.ok;
    std::printf("%s %d %s: %s\n", v.ok ? "PASS" : "FAIL", index, name, v.note.c_str());
  }
  return failed == 0 ? 0 : 1;
}
