#include "reactor/detection.hpp"

#include <algorithm>
#include <functional>

#include "reactor/error.hpp"

namespace reactor {

std::string_view to_string(SelectionPolicy p) noexcept {
  switch (p) {
    case SelectionPolicy::First: return "first";
    case SelectionPolicy::Last: return "last";
    case SelectionPolicy::All: return "all";
  }
  return "first";
}

std::string_view to_string(ConsumptionPolicy p) noexcept {
  return p == ConsumptionPolicy::Single ? "single" : "multiple";
}

std::vector<Occurrence> select_candidates(std::vector<Occurrence> candidates, SelectionPolicy p) {
  std::sort(candidates.begin(), candidates.end(), canonical_less);
  if (candidates.empty() || p == SelectionPolicy::All) return candidates;
  if (p == SelectionPolicy::First) return {std::move(candidates.front())};
  return {std::move(candidates.back())};
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool before(const Occurrence& a, const Occurrence& b) { return *a.interval.end < b.interval.start; }

// All (k)-subsets of `pool`, pairwise disjoint and disjoint from `seed`,
// each folded into `seed`.
void extend_disjoint(const std::vector<Occurrence>& pool, std::size_t k, const Occurrence& seed,
                     std::vector<Occurrence>& out) {
  std::vector<const Occurrence*> picked;
  std::function<void(std::size_t, const Occurrence&)> rec = [&](std::size_t from, const Occurrence& acc) {
    if (picked.size() == k) {
      out.push_back(acc);
      return;
    }
    for (std::size_t i = from; i < pool.size(); ++i) {
      if (pool.size() - i < k - picked.size()) break;
      if (acc.shares_component(pool[i])) continue;
      Occurrence stripped = pool[i];
      stripped.bindings.clear();
      picked.push_back(&pool[i]);
      rec(i + 1, *merge(acc, stripped));
      picked.pop_back();
    }
  };
  Occurrence start = seed;
  start.bindings.clear();
  rec(0, start);
}

}  // namespace

Detector::Detector(EventExpr expr, DetectorConfig config)
    : expr_(std::move(expr)), config_(config) {
  validate(expr_);
  if (config_.window && *config_.window <= 0) {
    throw Error(ErrorCode::InvalidExpression, "window must be positive");
  }
  root_ = compile(expr_);
  relevant_types_ = leaf_types(expr_);
}

std::size_t Detector::compile(const EventExpr& expr) {
  std::vector<std::size_t> children;
  // whether the parent reads each child's accumulated occurrences
  std::vector<bool> keep;
  std::visit(Overloaded{
                 [](const Atomic&) {},
                 [&](const Seq& s) {
                   children = {compile(s.left), compile(s.right)};
                   keep = {true, false};
                 },
                 [&](const And& s) {
                   children = {compile(s.left), compile(s.right)};
                   keep = {true, true};
                 },
                 [&](const Or& s) {
                   children = {compile(s.left), compile(s.right)};
                   keep = {false, false};
                 },
                 [&](const Not& s) {
                   children = {compile(s.absent), compile(s.opener), compile(s.closer)};
                   keep = {true, true, false};
                 },
                 [](const Any&) {},
                 [&](const Times& t) {
                   children = {compile(t.of)};
                   keep = {true};
                 },
             },
             static_cast<const ExprNode::variant&>(expr.node()));
  for (std::size_t i = 0; i < children.size(); ++i) nodes_[children[i]].keep_store = keep[i];
  nodes_.push_back(Node{&expr.node(), std::move(children), {}, {}, false});
  return nodes_.size() - 1;
}

std::vector<Occurrence> Detector::step(std::size_t index, const EventInstance& e) {
  std::vector<std::vector<Occurrence>> fresh;
  for (std::size_t child : nodes_[index].children) fresh.push_back(step(child, e));

  Node& node = nodes_[index];
  auto store_of = [&](std::size_t i) -> const std::vector<Occurrence>& {
    return nodes_[node.children[i]].store;
  };
  std::vector<Occurrence> out;

  std::visit(
      Overloaded{
          [&](const Atomic& a) {
            if (e.type == a.type) out.push_back(Occurrence::of_event(e, a.var));
          },
          [&](const Seq&) {
            // Only the right operand can contain the newest event.
            for (const auto& r : fresh[1]) {
              for (const auto& l : store_of(0)) {
                if (!before(l, r)) continue;
                if (auto m = merge(l, r)) out.push_back(std::move(*m));
              }
            }
          },
          [&](const And&) {
            for (const auto& l : fresh[0]) {
              for (const auto& r : store_of(1)) {
                if (l.shares_component(r)) continue;
                if (auto m = merge(l, r)) out.push_back(std::move(*m));
              }
            }
            for (const auto& r : fresh[1]) {
              for (const auto& l : store_of(0)) {
                if (l.shares_component(r)) continue;
                if (auto m = merge(l, r)) out.push_back(std::move(*m));
              }
            }
          },
          [&](const Or&) {
            out = fresh[0];
            out.insert(out.end(), fresh[1].begin(), fresh[1].end());
          },
          [&](const Not&) {
            const auto& absent = store_of(0);
            for (const auto& c : fresh[2]) {
              for (const auto& o : store_of(1)) {
                if (!before(o, c)) continue;
                bool blocked = std::any_of(absent.begin(), absent.end(), [&](const Occurrence& a) {
                  return before(o, a) && before(a, c);
                });
                if (blocked) continue;
                if (auto m = merge(o, c)) out.push_back(std::move(*m));
              }
            }
          },
          [&](const Any& a) {
            auto self = std::find(a.types.begin(), a.types.end(), e.type);
            if (self == a.types.end()) return;
            std::vector<const std::vector<Occurrence>*> others;
            for (const auto& t : a.types) {
              if (t == e.type) continue;
              auto it = node.by_type.find(t.name);
              if (it != node.by_type.end() && !it->second.empty()) others.push_back(&it->second);
            }
            const Occurrence seed = Occurrence::of_event(e);
            // choose n-1 of the other types, then one instance of each
            std::function<void(std::size_t, std::size_t, const Occurrence&)> rec =
                [&](std::size_t from, std::size_t left, const Occurrence& acc) {
                  if (left == 0) {
                    out.push_back(acc);
                    return;
                  }
                  for (std::size_t i = from; i + left <= others.size(); ++i) {
                    for (const auto& inst : *others[i]) rec(i + 1, left - 1, *merge(acc, inst));
                  }
                };
            rec(0, a.n - 1, seed);
            node.by_type[e.type.name].push_back(seed);
          },
          [&](const Times& t) {
            for (const auto& x : fresh[0]) extend_disjoint(store_of(0), t.n - 1, x, out);
          },
      },
      static_cast<const ExprNode::variant&>(*node.def));

  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (!nodes_[node.children[i]].keep_store) continue;
    auto& store = nodes_[node.children[i]].store;
    store.insert(store.end(), std::make_move_iterator(fresh[i].begin()),
                 std::make_move_iterator(fresh[i].end()));
  }
  if (config_.window) {
    // a partial wider than the window only widens further up the tree
    std::erase_if(out, [&](const Occurrence& o) { return o.terminator_time - o.initiator_time > *config_.window; });
  }
  canonicalize(out);
  return out;
}

template <class Pred>
void Detector::prune(Pred drop) {
  for (auto& node : nodes_) {
    std::erase_if(node.store, drop);
    for (auto& [type, list] : node.by_type) std::erase_if(list, drop);
  }
}

std::vector<Detection> Detector::feed(const EventInstance& e) {
  if (last_time_ && e.time < *last_time_) {
    throw Error(ErrorCode::OutOfOrderEvent, "event " + std::to_string(e.id) + " at " +
                                                std::to_string(e.time.value) + " precedes " +
                                                std::to_string(last_time_->value));
  }
  last_time_ = e.time;
  last_candidates_.clear();
  if (!relevant_types_.contains(e.type.name)) return {};

  retained_.insert_or_assign(e.id, e);
  auto candidates = step(root_, e);
  std::sort(candidates.begin(), candidates.end(), canonical_less);
  const auto selected = select_candidates(candidates, config_.selection);

  std::vector<Detection> fired;
  std::vector<EventId> used;
  for (auto& cand : candidates) {
    const bool chosen = std::any_of(selected.begin(), selected.end(),
                                    [&](const Occurrence& s) { return same_occurrence(s, cand); });
    bool fires = chosen;
    // single receive: a component can contribute to one firing only
    if (fires && config_.consumption == ConsumptionPolicy::Single) {
      fires = std::none_of(cand.components.begin(), cand.components.end(), [&](EventId id) {
        return std::find(used.begin(), used.end(), id) != used.end();
      });
      if (fires) used.insert(used.end(), cand.components.begin(), cand.components.end());
    }
    last_candidates_.push_back(Detection{cand, fires});
    if (fires) fired.push_back(Detection{std::move(cand), true});
  }
  for (const auto& d : fired) consume(d, config_.consumption);
  return fired;
}

void Detector::consume(const Detection& fired, ConsumptionPolicy policy) {
  if (policy == ConsumptionPolicy::Multiple) return;
  const auto& ids = fired.occurrence.components;
  for (EventId id : ids) {
    if (!retained_.contains(id)) {
      throw Error(ErrorCode::StaleDetection, "component " + std::to_string(id) + " is not retained");
    }
  }
  for (EventId id : ids) retained_.erase(id);
  prune([&](const Occurrence& o) {
    return std::any_of(ids.begin(), ids.end(), [&](EventId id) { return o.contains(id); });
  });
}

std::size_t Detector::expire(TimePoint now) {
  if (!config_.window) throw Error(ErrorCode::NoWindow, "detector has no window");
  const TimePoint threshold = now - *config_.window;
  const std::size_t removed = std::erase_if(retained_, [&](const auto& kv) { return kv.second.time < threshold; });
  if (removed > 0) {
    prune([&](const Occurrence& o) { return o.initiator_time < threshold; });
  }
  return removed;
}

std::size_t Detector::partial_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes_) {
    n += node.store.size();
    for (const auto& [type, list] : node.by_type) n += list.size();
  }
  return n;
}

}  // namespace reactor
