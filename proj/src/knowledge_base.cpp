#include "reactor/knowledge_base.hpp"

#include <cassert>
#include <stdexcept>

namespace reactor {

std::string to_string(const Fact& f) {
  std::string out = f.name;
  if (f.args.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(f.args[i]);
  }
  return out + ")";
}

KnowledgeBase::KnowledgeBase(std::set<Fact> initial) : initial_(initial), facts_(std::move(initial)) {}

std::set<Fact> KnowledgeBase::replay() const {
  std::set<Fact> state = initial_;
  for (const auto& entry : journal_) {
    for (const auto& u : entry.updates) {
      if (u.op == UpdateOp::Assert) {
        state.insert(u.fact);
      } else {
        state.erase(u.fact);
      }
    }
  }
  return state;
}

std::vector<const Fact*> KnowledgeBase::facts_named(const std::string& name) const {
  std::vector<const Fact*> out;
  for (auto it = facts_.lower_bound(Fact{name, {}}); it != facts_.end() && it->name == name; ++it) {
    out.push_back(&*it);
  }
  return out;
}

KnowledgeBase::Transaction KnowledgeBase::begin() {
  if (in_txn_) throw std::logic_error("nested knowledge-base transaction");
  in_txn_ = true;
  return Transaction(*this);
}

KnowledgeBase::Transaction::Transaction(KnowledgeBase& kb) : kb_(&kb) {}

KnowledgeBase::Transaction::Transaction(Transaction&& other) noexcept
    : kb_(other.kb_), updates_(std::move(other.updates_)), open_(other.open_) {
  other.open_ = false;
}

KnowledgeBase::Transaction::~Transaction() {
  if (open_) rollback();
}

bool KnowledgeBase::Transaction::assert_fact(const Fact& f) {
  assert(open_);
  if (!kb_->facts_.insert(f).second) return false;
  updates_.push_back(Update{UpdateOp::Assert, f});
  return true;
}

bool KnowledgeBase::Transaction::retract_fact(const Fact& f) {
  assert(open_);
  if (kb_->facts_.erase(f) == 0) return false;
  updates_.push_back(Update{UpdateOp::Retract, f});
  return true;
}

void KnowledgeBase::Transaction::commit() {
  if (!open_) return;
  if (!updates_.empty()) kb_->journal_.push_back(JournalEntry{kb_->next_txn_++, updates_});
  kb_->in_txn_ = false;
  open_ = false;
}

void KnowledgeBase::Transaction::rollback() {
  if (!open_) return;
  for (auto it = updates_.rbegin(); it != updates_.rend(); ++it) {
    if (it->op == UpdateOp::Assert) {
      kb_->facts_.erase(it->fact);
    } else {
      kb_->facts_.insert(it->fact);
    }
  }
  updates_.clear();
  kb_->in_txn_ = false;
  open_ = false;
}

}  // namespace reactor
