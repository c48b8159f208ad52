#include "reactor/event_algebra.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <set>

#include "reactor/error.hpp"

namespace reactor {

EventExpr::EventExpr(ExprNode node) : node_(std::make_shared<const ExprNode>(std::move(node))) {}

EventExpr make_atomic(EventTypeId type, std::optional<std::string> var) {
  return EventExpr(Atomic{std::move(type), std::move(var)});
}
EventExpr make_seq(EventExpr left, EventExpr right) {
  return EventExpr(Seq{std::move(left), std::move(right)});
}
EventExpr make_and(EventExpr left, EventExpr right) {
  return EventExpr(And{std::move(left), std::move(right)});
}
EventExpr make_or(EventExpr left, EventExpr right) {
  return EventExpr(Or{std::move(left), std::move(right)});
}
EventExpr make_not(EventExpr absent, EventExpr opener, EventExpr closer) {
  return EventExpr(Not{std::move(absent), std::move(opener), std::move(closer)});
}
EventExpr make_any(std::size_t n, std::vector<EventTypeId> types) {
  return EventExpr(Any{n, std::move(types)});
}
EventExpr make_times(std::size_t n, EventExpr of) { return EventExpr(Times{n, std::move(of)}); }

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void collect_vars(const EventExpr& expr, std::vector<std::string>& out, bool include_times) {
  std::visit(Overloaded{
                 [&](const Atomic& a) {
                   if (a.var) out.push_back(*a.var);
                 },
                 [&](const Seq& s) {
                   collect_vars(s.left, out, include_times);
                   collect_vars(s.right, out, include_times);
                 },
                 [&](const And& s) {
                   collect_vars(s.left, out, include_times);
                   collect_vars(s.right, out, include_times);
                 },
                 [&](const Or& s) {
                   collect_vars(s.left, out, include_times);
                   collect_vars(s.right, out, include_times);
                 },
                 [&](const Not& s) {
                   collect_vars(s.absent, out, include_times);
                   collect_vars(s.opener, out, include_times);
                   collect_vars(s.closer, out, include_times);
                 },
                 [&](const Any&) {},
                 [&](const Times& t) {
                   if (include_times) collect_vars(t.of, out, include_times);
                 },
             },
             static_cast<const ExprNode::variant&>(expr.node()));
}

void validate_node(const EventExpr& expr) {
  std::visit(Overloaded{
                 [](const Atomic& a) {
                   if (a.type.name.empty()) {
                     throw Error(ErrorCode::InvalidExpression, "empty event type name");
                   }
                 },
                 [](const Seq& s) {
                   validate_node(s.left);
                   validate_node(s.right);
                 },
                 [](const And& s) {
                   validate_node(s.left);
                   validate_node(s.right);
                 },
                 [](const Or& s) {
                   validate_node(s.left);
                   validate_node(s.right);
                 },
                 [](const Not& s) {
                   validate_node(s.absent);
                   validate_node(s.opener);
                   validate_node(s.closer);
                 },
                 [](const Any& a) {
                   if (a.n == 0) throw Error(ErrorCode::InvalidExpression, "any: n must be positive");
                   if (a.n > a.types.size()) {
                     throw Error(ErrorCode::InvalidExpression,
                                 "any: n = " + std::to_string(a.n) + " exceeds " +
                                     std::to_string(a.types.size()) + " listed types");
                   }
                   std::set<std::string> seen;
                   for (const auto& t : a.types) {
                     if (t.name.empty()) {
                       throw Error(ErrorCode::InvalidExpression, "empty event type name");
                     }
                     if (!seen.insert(t.name).second) {
                       throw Error(ErrorCode::InvalidExpression, "any: duplicate type " + t.name);
                     }
                   }
                 },
                 [](const Times& t) {
                   if (t.n == 0) throw Error(ErrorCode::InvalidExpression, "times: n must be positive");
                   validate_node(t.of);
                 },
             },
             static_cast<const ExprNode::variant&>(expr.node()));
}

}  // namespace

void validate(const EventExpr& expr) {
  validate_node(expr);
  std::vector<std::string> vars;
  collect_vars(expr, vars, true);
  std::set<std::string> seen;
  for (const auto& v : vars) {
    if (!seen.insert(v).second) {
      throw Error(ErrorCode::InvalidExpression, "binding ?" + v + " used more than once");
    }
  }
}

std::set<std::string> leaf_types(const EventExpr& expr) {
  std::set<std::string> out;
  std::function<void(const EventExpr&)> walk = [&](const EventExpr& e) {
    std::visit(Overloaded{
                   [&](const Atomic& a) { out.insert(a.type.name); },
                   [&](const Seq& s) { walk(s.left), walk(s.right); },
                   [&](const And& s) { walk(s.left), walk(s.right); },
                   [&](const Or& s) { walk(s.left), walk(s.right); },
                   [&](const Not& s) { walk(s.absent), walk(s.opener), walk(s.closer); },
                   [&](const Any& a) {
                     for (const auto& t : a.types) out.insert(t.name);
                   },
                   [&](const Times& t) { walk(t.of); },
               },
               static_cast<const ExprNode::variant&>(e.node()));
  };
  walk(expr);
  return out;
}

std::vector<std::string> bound_variables(const EventExpr& expr) {
  std::vector<std::string> out;
  collect_vars(expr, out, false);
  return out;
}

std::string to_string(const EventExpr& expr) {
  return std::visit(
      Overloaded{
          [](const Atomic& a) { return a.type.name + (a.var ? " as ?" + *a.var : std::string()); },
          [](const Seq& s) { return "seq(" + to_string(s.left) + ", " + to_string(s.right) + ")"; },
          [](const And& s) { return "and(" + to_string(s.left) + ", " + to_string(s.right) + ")"; },
          [](const Or& s) { return "or(" + to_string(s.left) + ", " + to_string(s.right) + ")"; },
          [](const Not& s) {
            return "not(" + to_string(s.absent) + ", " + to_string(s.opener) + ", " +
                   to_string(s.closer) + ")";
          },
          [](const Any& a) {
            std::string out = "any(" + std::to_string(a.n);
            for (const auto& t : a.types) out += ", " + t.name;
            return out + ")";
          },
          [](const Times& t) { return "times(" + std::to_string(t.n) + ", " + to_string(t.of) + ")"; },
      },
      static_cast<const ExprNode::variant&>(expr.node()));
}

// ---------------------------------------------------------------------------
// Occurrence

Occurrence Occurrence::of_event(const EventInstance& e, const std::optional<std::string>& var) {
  Occurrence o;
  o.interval = e.mvi();
  if (var) o.bindings.emplace(*var, e);
  o.components = {e.id};
  o.initiator_time = o.terminator_time = e.time;
  o.initiator_id = o.terminator_id = e.id;
  return o;
}

bool Occurrence::shares_component(const Occurrence& other) const {
  auto a = components.begin();
  auto b = other.components.begin();
  while (a != components.end() && b != other.components.end()) {
    if (*a == *b) return true;
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

bool Occurrence::contains(EventId id) const {
  return std::binary_search(components.begin(), components.end(), id);
}

std::optional<Occurrence> merge(const Occurrence& a, const Occurrence& b) {
  Occurrence out;
  out.bindings = a.bindings;
  for (const auto& [name, ev] : b.bindings) {
    if (!out.bindings.emplace(name, ev).second) return std::nullopt;
  }
  out.interval = interval_cover(a.interval, b.interval);
  out.components.reserve(a.components.size() + b.components.size());
  std::set_union(a.components.begin(), a.components.end(), b.components.begin(),
                 b.components.end(), std::back_inserter(out.components));
  if (std::tie(a.initiator_time, a.initiator_id) <= std::tie(b.initiator_time, b.initiator_id)) {
    out.initiator_time = a.initiator_time;
    out.initiator_id = a.initiator_id;
  } else {
    out.initiator_time = b.initiator_time;
    out.initiator_id = b.initiator_id;
  }
  if (std::tie(a.terminator_time, a.terminator_id) >= std::tie(b.terminator_time, b.terminator_id)) {
    out.terminator_time = a.terminator_time;
    out.terminator_id = a.terminator_id;
  } else {
    out.terminator_time = b.terminator_time;
    out.terminator_id = b.terminator_id;
  }
  return out;
}

namespace {

int compare_bindings(const Occurrence& a, const Occurrence& b) {
  auto ia = a.bindings.begin();
  auto ib = b.bindings.begin();
  for (; ia != a.bindings.end() && ib != b.bindings.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    if (ia->second.id != ib->second.id) return ia->second.id < ib->second.id ? -1 : 1;
  }
  if (ia == a.bindings.end() && ib == b.bindings.end()) return 0;
  return ia == a.bindings.end() ? -1 : 1;
}

}  // namespace

bool canonical_less(const Occurrence& a, const Occurrence& b) {
  if (auto c = std::tie(a.initiator_time, a.initiator_id, a.interval.end) <=>
               std::tie(b.initiator_time, b.initiator_id, b.interval.end);
      c != 0) {
    return c < 0;
  }
  if (a.components != b.components) return a.components < b.components;
  return compare_bindings(a, b) < 0;
}

bool same_occurrence(const Occurrence& a, const Occurrence& b) {
  return !canonical_less(a, b) && !canonical_less(b, a);
}

void canonicalize(std::vector<Occurrence>& occurrences) {
  std::sort(occurrences.begin(), occurrences.end(), canonical_less);
  occurrences.erase(std::unique(occurrences.begin(), occurrences.end(), same_occurrence),
                    occurrences.end());
}

// ---------------------------------------------------------------------------
// Brute-force interval semantics

namespace {

void require_sorted(std::span<const EventInstance> history) {
  std::set<EventId> ids;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (!ids.insert(history[i].id).second) {
      throw Error(ErrorCode::UnsortedHistory, "duplicate event id " + std::to_string(history[i].id));
    }
    if (i > 0 && std::tie(history[i].time, history[i].id) <=
                     std::tie(history[i - 1].time, history[i - 1].id)) {
      throw Error(ErrorCode::UnsortedHistory,
                  "event " + std::to_string(history[i].id) + " out of (time, id) order");
    }
  }
}

Occurrence without_bindings(Occurrence o) {
  o.bindings.clear();
  return o;
}

// Every k-subset of `pool` (by increasing index) whose members are pairwise
// compatible under `fits`, folded with `join`.
template <class T, class Fits, class Join, class Emit>
void for_each_subset(const std::vector<T>& pool, std::size_t k, Fits fits, Join join, Emit emit) {
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t, const T*)> rec = [&](std::size_t from, const T* acc) {
    if (chosen.size() == k) {
      emit(*acc);
      return;
    }
    for (std::size_t i = from; i < pool.size(); ++i) {
      if (pool.size() - i < k - chosen.size()) break;
      bool ok = true;
      for (std::size_t j : chosen) {
        if (!fits(pool[j], pool[i])) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      chosen.push_back(i);
      if (acc == nullptr) {
        rec(i + 1, &pool[i]);
      } else {
        T next = join(*acc, pool[i]);
        rec(i + 1, &next);
      }
      chosen.pop_back();
    }
  };
  if (k == 0) return;
  rec(0, nullptr);
}

std::vector<Occurrence> eval_interval(const EventExpr& expr, std::span<const EventInstance> history);

std::vector<Occurrence> pairs(const std::vector<Occurrence>& left,
                              const std::vector<Occurrence>& right,
                              const std::function<bool(const Occurrence&, const Occurrence&)>& keep) {
  std::vector<Occurrence> out;
  for (const auto& l : left) {
    for (const auto& r : right) {
      if (!keep(l, r)) continue;
      if (auto m = merge(l, r)) out.push_back(std::move(*m));
    }
  }
  return out;
}

std::vector<Occurrence> eval_interval(const EventExpr& expr, std::span<const EventInstance> history) {
  std::vector<Occurrence> out = std::visit(
      Overloaded{
          [&](const Atomic& a) {
            std::vector<Occurrence> r;
            for (const auto& e : history) {
              if (e.type == a.type) r.push_back(Occurrence::of_event(e, a.var));
            }
            return r;
          },
          [&](const Seq& s) {
            return pairs(eval_interval(s.left, history), eval_interval(s.right, history),
                         [](const Occurrence& l, const Occurrence& r) {
                           return strictly_before(l.interval, r.interval);
                         });
          },
          [&](const And& s) {
            return pairs(eval_interval(s.left, history), eval_interval(s.right, history),
                         [](const Occurrence& l, const Occurrence& r) { return !l.shares_component(r); });
          },
          [&](const Or& s) {
            auto l = eval_interval(s.left, history);
            auto r = eval_interval(s.right, history);
            l.insert(l.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
            return l;
          },
          [&](const Not& s) {
            auto absent = eval_interval(s.absent, history);
            auto candidates = pairs(eval_interval(s.opener, history), eval_interval(s.closer, history),
                                    [&](const Occurrence& o, const Occurrence& c) {
                                      if (!strictly_before(o.interval, c.interval)) return false;
                                      return std::none_of(absent.begin(), absent.end(), [&](const Occurrence& a) {
                                        return strictly_before(o.interval, a.interval) &&
                                               strictly_before(a.interval, c.interval);
                                      });
                                    });
            return candidates;
          },
          [&](const Any& a) {
            std::vector<Occurrence> pool;
            for (const auto& e : history) {
              if (std::find(a.types.begin(), a.types.end(), e.type) != a.types.end()) {
                pool.push_back(Occurrence::of_event(e));
              }
            }
            std::map<EventId, std::string> type_of;
            for (const auto& e : history) type_of.emplace(e.id, e.type.name);
            std::vector<Occurrence> r;
            for_each_subset(
                pool, a.n,
                [&](const Occurrence& x, const Occurrence& y) {
                  return type_of.at(x.initiator_id) != type_of.at(y.initiator_id);
                },
                [](const Occurrence& x, const Occurrence& y) { return *merge(x, y); },
                [&](const Occurrence& o) { r.push_back(o); });
            return r;
          },
          [&](const Times& t) {
            std::vector<Occurrence> pool;
            for (auto& o : eval_interval(t.of, history)) pool.push_back(without_bindings(std::move(o)));
            canonicalize(pool);
            std::vector<Occurrence> r;
            for_each_subset(
                pool, t.n,
                [](const Occurrence& x, const Occurrence& y) { return !x.shares_component(y); },
                [](const Occurrence& x, const Occurrence& y) { return *merge(x, y); },
                [&](const Occurrence& o) { r.push_back(o); });
            return r;
          },
      },
      static_cast<const ExprNode::variant&>(expr.node()));
  canonicalize(out);
  return out;
}

// ---------------------------------------------------------------------------
// Point semantics

PointOccurrence join_point(const PointOccurrence& a, const PointOccurrence& b) {
  PointOccurrence out;
  out.time = std::max(a.time, b.time);
  std::set_union(a.components.begin(), a.components.end(), b.components.begin(),
                 b.components.end(), std::back_inserter(out.components));
  return out;
}

bool disjoint(const PointOccurrence& a, const PointOccurrence& b) {
  std::vector<EventId> both;
  std::set_intersection(a.components.begin(), a.components.end(), b.components.begin(),
                        b.components.end(), std::back_inserter(both));
  return both.empty();
}

std::vector<PointOccurrence> eval_point(const EventExpr& expr, std::span<const EventInstance> history) {
  auto point_pairs = [](const std::vector<PointOccurrence>& left,
                        const std::vector<PointOccurrence>& right, auto keep) {
    std::vector<PointOccurrence> r;
    for (const auto& l : left) {
      for (const auto& rr : right) {
        if (disjoint(l, rr) && keep(l, rr)) r.push_back(join_point(l, rr));
      }
    }
    return r;
  };
  std::vector<PointOccurrence> out = std::visit(
      Overloaded{
          [&](const Atomic& a) {
            std::vector<PointOccurrence> r;
            for (const auto& e : history) {
              if (e.type == a.type) r.push_back({e.time, {e.id}});
            }
            return r;
          },
          [&](const Seq& s) {
            return point_pairs(eval_point(s.left, history), eval_point(s.right, history),
                               [](const PointOccurrence& l, const PointOccurrence& r) { return l.time < r.time; });
          },
          [&](const And& s) {
            return point_pairs(eval_point(s.left, history), eval_point(s.right, history),
                               [](const PointOccurrence&, const PointOccurrence&) { return true; });
          },
          [&](const Or& s) {
            auto l = eval_point(s.left, history);
            auto r = eval_point(s.right, history);
            l.insert(l.end(), r.begin(), r.end());
            return l;
          },
          [&](const Not& s) {
            auto absent = eval_point(s.absent, history);
            return point_pairs(eval_point(s.opener, history), eval_point(s.closer, history),
                               [&](const PointOccurrence& o, const PointOccurrence& c) {
                                 if (!(o.time < c.time)) return false;
                                 return std::none_of(absent.begin(), absent.end(), [&](const PointOccurrence& a) {
                                   return o.time < a.time && a.time < c.time;
                                 });
                               });
          },
          [&](const Any& a) {
            std::vector<PointOccurrence> pool;
            std::map<EventId, std::string> type_of;
            for (const auto& e : history) {
              if (std::find(a.types.begin(), a.types.end(), e.type) != a.types.end()) {
                pool.push_back({e.time, {e.id}});
                type_of.emplace(e.id, e.type.name);
              }
            }
            std::vector<PointOccurrence> r;
            for_each_subset(
                pool, a.n,
                [&](const PointOccurrence& x, const PointOccurrence& y) {
                  return type_of.at(x.components.front()) != type_of.at(y.components.front());
                },
                join_point, [&](const PointOccurrence& o) { r.push_back(o); });
            return r;
          },
          [&](const Times& t) {
            auto pool = eval_point(t.of, history);
            std::vector<PointOccurrence> r;
            for_each_subset(pool, t.n, disjoint, join_point,
                            [&](const PointOccurrence& o) { r.push_back(o); });
            return r;
          },
      },
      static_cast<const ExprNode::variant&>(expr.node()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<Occurrence> occurrences(const EventExpr& expr, std::span<const EventInstance> history) {
  require_sorted(history);
  return eval_interval(expr, history);
}

std::vector<PointOccurrence> occurrences_point(const EventExpr& expr,
                                               std::span<const EventInstance> history) {
  require_sorted(history);
  return eval_point(expr, history);
}

}  // namespace reactor
