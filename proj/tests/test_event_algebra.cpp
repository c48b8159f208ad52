#include <random>

#include "doctest.h"
#include "reactor/error.hpp"
#include "reactor/event_algebra.hpp"
#include "support/generators.hpp"

using namespace reactor;
using reactor::testing::ev;
using reactor::testing::keys;

namespace {

std::vector<std::int64_t> point_times(const std::vector<PointOccurrence>& ps) {
  std::vector<std::int64_t> out;
  for (const auto& p : ps) out.push_back(p.time.value);
  return out;
}

}  // namespace

TEST_CASE("atomic occurrences") {
  std::vector<EventInstance> h{ev("A", 1, 1), ev("B", 2, 2)};
  auto occ = occurrences(make_atomic("A", "a"), h);
  REQUIRE(occ.size() == 1);
  CHECK(occ[0].interval == Interval::closed(TimePoint{1}, TimePoint{1}));
  CHECK(occ[0].bindings.at("a").id == 1);
  CHECK(occ[0].components == std::vector<EventId>{1});
}

TEST_CASE("nested sequence rejects an initiator that came late") {
  std::vector<EventInstance> h{ev("B", 1, 1), ev("A", 2, 2), ev("C", 3, 3)};
  // independent check: enumerate every (A, B, C) triple and test the
  // nested ordering directly
  int matches = 0;
  for (const auto& a : h) {
    for (const auto& b : h) {
      for (const auto& c : h) {
        if (a.type.name == "A" && b.type.name == "B" && c.type.name == "C" && a.time < b.time &&
            b.time < c.time) {
          ++matches;
        }
      }
    }
  }
  REQUIRE(matches == 0);
  CHECK(occurrences(make_seq(make_atomic("A"), make_seq(make_atomic("B"), make_atomic("C"))), h).empty());
}

TEST_CASE("times counts four outages once") {
  std::vector<EventInstance> h;
  for (int i = 1; i <= 4; ++i) h.push_back(ev("outage", i, static_cast<EventId>(i)));
  auto occ = occurrences(make_times(4, make_atomic("outage")), h);
  REQUIRE(occ.size() == 1);
  CHECK(occ[0].interval == Interval::closed(TimePoint{1}, TimePoint{4}));
  CHECK(occ[0].components == std::vector<EventId>{1, 2, 3, 4});

  // C(4, 3) = 4 three-subsets
  CHECK(occurrences(make_times(3, make_atomic("outage")), h).size() == 4);
}

TEST_CASE("conjunction ignores order") {
  std::vector<EventInstance> h{ev("B", 1, 1), ev("A", 2, 2)};
  auto occ = occurrences(make_and(make_atomic("A"), make_atomic("B")), h);
  REQUIRE(occ.size() == 1);
  CHECK(occ[0].interval == Interval::closed(TimePoint{1}, TimePoint{2}));
  CHECK(occ[0].initiator_id == 1);
  CHECK(occ[0].terminator_id == 2);
}

TEST_CASE("negation blocks on an absent event strictly inside") {
  auto expr = make_not(make_atomic("X"), make_atomic("A"), make_atomic("C"));
  CHECK(occurrences(expr, std::vector{ev("A", 1, 1), ev("X", 2, 2), ev("C", 3, 3)}).empty());
  auto occ = occurrences(expr, std::vector{ev("A", 1, 1), ev("C", 3, 2)});
  REQUIRE(occ.size() == 1);
  CHECK(occ[0].interval == Interval::closed(TimePoint{1}, TimePoint{3}));
  // an absent event at the closer's instant is not strictly inside
  CHECK(occurrences(expr, std::vector{ev("A", 1, 1), ev("X", 3, 2), ev("C", 3, 3)}).size() == 1);
}

TEST_CASE("any picks distinct types") {
  std::vector<EventInstance> h{ev("A", 1, 1), ev("A", 2, 2), ev("B", 3, 3)};
  auto occ = occurrences(make_any(2, {"A", "B"}), h);
  CHECK(keys(occ) == std::set<testing::OccurrenceKey>{{{1, 3}, {1, 3}}, {{2, 3}, {2, 3}}});
  CHECK(occurrences(make_any(2, {"A", "C"}), h).empty());
}

TEST_CASE("sequence discards pairs binding the same variable") {
  // not reachable through validate(); merge() still has to refuse it
  auto a = Occurrence::of_event(ev("A", 1, 1), "x");
  auto b = Occurrence::of_event(ev("B", 2, 2), "x");
  CHECK_FALSE(merge(a, b).has_value());
  CHECK(occurrences(make_seq(make_atomic("A", "x"), make_atomic("B", "x")),
                    std::vector{ev("A", 1, 1), ev("B", 2, 2)})
            .empty());
}

TEST_CASE("point semantics stamps complex events with the terminator time") {
  CHECK(point_times(occurrences_point(make_seq(make_atomic("A"), make_atomic("B")),
                                      std::vector{ev("A", 1, 1), ev("B", 3, 2)})) ==
        std::vector<std::int64_t>{3});
  CHECK(point_times(occurrences_point(make_atomic("A"), std::vector{ev("A", 1, 1)})) ==
        std::vector<std::int64_t>{1});

  std::vector<EventInstance> witness{ev("B", 1, 1), ev("A", 2, 2), ev("C", 3, 3)};
  auto right = make_seq(make_atomic("A"), make_seq(make_atomic("B"), make_atomic("C")));
  auto left = make_seq(make_seq(make_atomic("A"), make_atomic("B")), make_atomic("C"));
  auto fired = occurrences_point(right, witness);
  REQUIRE(fired.size() == 1);
  CHECK(fired[0].time == TimePoint{3});
  CHECK(fired[0].components == std::vector<EventId>{1, 2, 3});
  CHECK(occurrences_point(left, witness).empty());
  CHECK(occurrences(right, witness).empty());
}

TEST_CASE("unsorted history is rejected") {
  std::vector<EventInstance> h{ev("A", 2, 1), ev("A", 1, 2)};
  CHECK_THROWS_AS(occurrences(make_atomic("A"), h), Error);
  std::vector<EventInstance> dup{ev("A", 1, 1), ev("A", 1, 1)};
  try {
    occurrences_point(make_atomic("A"), dup);
    FAIL("expected UnsortedHistory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsortedHistory);
  }
}

TEST_CASE("validate rejects malformed expressions") {
  auto code_of = [](const EventExpr& e) {
    try {
      validate(e);
    } catch (const Error& err) {
      return err.code();
    }
    return ErrorCode::SyntaxError;  // sentinel: no error
  };
  CHECK(code_of(make_any(3, {"A", "B"})) == ErrorCode::InvalidExpression);
  CHECK(code_of(make_any(1, {"A", "A"})) == ErrorCode::InvalidExpression);
  CHECK(code_of(make_any(0, {"A"})) == ErrorCode::InvalidExpression);
  CHECK(code_of(make_times(0, make_atomic("A"))) == ErrorCode::InvalidExpression);
  CHECK(code_of(make_and(make_atomic("A", "x"), make_atomic("B", "x"))) == ErrorCode::InvalidExpression);
  CHECK(code_of(make_seq(make_atomic("A", "x"), make_atomic("B", "y"))) == ErrorCode::SyntaxError);
}

TEST_CASE("expression helpers") {
  auto e = make_seq(make_atomic("a", "x"), make_times(2, make_or(make_atomic("b", "y"), make_any(1, {"c", "d"}))));
  CHECK(to_string(e) == "seq(a as ?x, times(2, or(b as ?y, any(1, c, d))))");
  CHECK(leaf_types(e) == std::set<std::string>{"a", "b", "c", "d"});
  CHECK(bound_variables(e) == std::vector<std::string>{"x"});
}

TEST_CASE("sequence is associative under interval semantics") {
  std::mt19937_64 rng(0xA55);
  auto a = make_atomic("A");
  auto b = make_atomic("B");
  auto c = make_atomic("C");
  auto left = make_seq(make_seq(a, b), c);
  auto right = make_seq(a, make_seq(b, c));
  for (int trial = 0; trial < 500; ++trial) {
    auto h = testing::random_history(rng, 10, 3);
    CHECK(keys(occurrences(left, h)) == keys(occurrences(right, h)));
  }
}

TEST_CASE("or and and commute under both semantics") {
  std::mt19937_64 rng(0xC0FFEE);
  testing::ExprGenerator gen(rng);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = gen(1);
    auto y = gen(1);
    auto h = testing::random_history(rng, 8);
    CHECK(keys(occurrences(make_or(x, y), h)) == keys(occurrences(make_or(y, x), h)));
    CHECK(keys(occurrences(make_and(x, y), h)) == keys(occurrences(make_and(y, x), h)));
    CHECK(occurrences_point(make_or(x, y), h) == occurrences_point(make_or(y, x), h));
    CHECK(occurrences_point(make_and(x, y), h) == occurrences_point(make_and(y, x), h));
  }
}

TEST_CASE("occurrence interval is the cover of its components") {
  std::mt19937_64 rng(42);
  testing::ExprGenerator gen(rng);
  for (int trial = 0; trial < 300; ++trial) {
    auto expr = gen(3);
    auto h = testing::random_history(rng, 10);
    std::map<EventId, const EventInstance*> by_id;
    for (const auto& e : h) by_id[e.id] = &e;
    for (const auto& o : occurrences(expr, h)) {
      REQUIRE_FALSE(o.components.empty());
      CHECK(std::is_sorted(o.components.begin(), o.components.end()));
      Interval cover = by_id.at(o.components.front())->mvi();
      for (EventId id : o.components) cover = interval_cover(cover, by_id.at(id)->mvi());
      CHECK(o.interval == cover);
      CHECK(o.interval.start == o.initiator_time);
      CHECK(*o.interval.end == o.terminator_time);
      CHECK(by_id.at(o.initiator_id)->time == o.initiator_time);
      CHECK(by_id.at(o.terminator_id)->time == o.terminator_time);
    }
  }
}

TEST_CASE("monotonicity under appending; negation is the exception for insertion") {
  std::mt19937_64 rng(7);
  testing::ExprGenerator gen(rng);
  for (int trial = 0; trial < 300; ++trial) {
    auto expr = gen(2);
    auto h = testing::random_history(rng, 9);
    auto before = keys(occurrences(expr, h));
    auto longer = h;
    const std::int64_t last = h.empty() ? 0 : h.back().time.value;
    longer.push_back(ev(testing::kTypes[trial % 4], last + trial % 2, h.size() + 1));
    auto after = keys(occurrences(expr, longer));
    CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
  }

  // Inserting an event into the middle of the history can retract a
  // negation occurrence...
  auto expr = make_not(make_atomic("X"), make_atomic("A"), make_atomic("C"));
  std::vector<EventInstance> h{ev("A", 1, 10), ev("C", 3, 30)};
  REQUIRE(occurrences(expr, h).size() == 1);
  std::vector<EventInstance> inserted{ev("A", 1, 10), ev("X", 2, 20), ev("C", 3, 30)};
  CHECK(occurrences(expr, inserted).empty());

  // ...while negation-free expressions keep every occurrence.
  auto seq = make_seq(make_atomic("A"), make_atomic("C"));
  CHECK(keys(occurrences(seq, h)) == keys(occurrences(seq, inserted)));
}
