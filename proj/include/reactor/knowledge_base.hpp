#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "reactor/event_model.hpp"

namespace reactor {

/// Ground fact name(args...). Identity is structural.
struct Fact {
  std::string name;
  std::vector<Value> args;

  friend auto operator<=>(const Fact&, const Fact&) = default;
};

std::string to_string(const Fact& f);

enum class UpdateOp { Assert, Retract };

struct Update {
  UpdateOp op;
  Fact fact;

  friend bool operator==(const Update&, const Update&) = default;
};

struct JournalEntry {
  std::uint64_t txn = 0;
  std::vector<Update> updates;
};

/// Extensional fact store. Only committed transactions reach the journal,
/// and replaying the journal over the initial facts yields the current set.
class KnowledgeBase {
 public:
  class Transaction;

  KnowledgeBase() = default;
  explicit KnowledgeBase(std::set<Fact> initial);

  bool contains(const Fact& f) const { return facts_.contains(f); }
  const std::set<Fact>& facts() const { return facts_; }
  const std::set<Fact>& initial_facts() const { return initial_; }
  const std::vector<JournalEntry>& journal() const { return journal_; }

  /// Initial facts with every journal entry applied in order.
  std::set<Fact> replay() const;

  /// Facts named `name`, in canonical order.
  std::vector<const Fact*> facts_named(const std::string& name) const;

  /// Opens a transaction. Changes are visible through this KnowledgeBase
  /// immediately and undone unless commit() is called. One at a time.
  Transaction begin();

 private:
  std::set<Fact> initial_;
  std::set<Fact> facts_;
  std::vector<JournalEntry> journal_;
  std::uint64_t next_txn_ = 1;
  bool in_txn_ = false;
};

class KnowledgeBase::Transaction {
 public:
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;
  Transaction(Transaction&& other) noexcept;
  Transaction& operator=(Transaction&&) = delete;
  ~Transaction();

  /// Returns false (and records nothing) if the fact is already present.
  bool assert_fact(const Fact& f);
  /// Returns false (and records nothing) if the fact is absent.
  bool retract_fact(const Fact& f);

  const std::vector<Update>& updates() const { return updates_; }

  void commit();
  void rollback();

 private:
  friend class KnowledgeBase;
  explicit Transaction(KnowledgeBase& kb);

  KnowledgeBase* kb_;
  std::vector<Update> updates_;
  bool open_ = true;
};

}  // namespace reactor
