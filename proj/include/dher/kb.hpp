#pragma once
#include <iosfwd>
#include <map>
#include <vector>

#include "dher/goal.hpp"
#include "dher/rng.hpp"
#include "dher/schema.hpp"

namespace dher {

// One backend row: a concrete value for every slot.
using KbRow = std::vector<ValueId>;

// Flat table the system books against. Every row is fully populated, so any
// goal sampled off a row is satisfiable.
class KnowledgeBase {
public:
  explicit KnowledgeBase(const SlotSchema* schema) : schema_(schema) {}

  void add_row(KbRow row);
  std::size_t size() const { return rows_.size(); }
  const KbRow& row(std::size_t i) const { return rows_.at(i); }

  // Rows whose values match every binding in `constraints` (dontcare matches
  // anything; unknown bindings are ignored). Served from per-slot posting
  // lists, so cost scales with the matching set, not the table.
  std::vector<std::size_t> matching_rows(const std::map<SlotId, ValueId>& constraints) const;

  // First matching row, or npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t first_match(const std::map<SlotId, ValueId>& constraints) const;

  // Random satisfiable goal: pick a row, take 1..max_constraints of its
  // informable values as constraints, request the booking slot plus a random
  // subset of the other requestables.
  Goal sample_goal(RandomStream& rng, int max_constraints) const;

  // Procedural table with `rows` entries (deterministic in seed).
  static KnowledgeBase generate(const SlotSchema* schema, std::size_t rows, std::uint64_t seed);

  // One JSON object per line, keyed by slot name.
  void export_jsonl(std::ostream& os) const;
  static KnowledgeBase import_jsonl(const SlotSchema* schema, std::istream& is);

  const SlotSchema& schema() const { return *schema_; }

private:
  const SlotSchema* schema_;
  std::vector<KbRow> rows_;
  // postings_[slot][value] = sorted row ids carrying that value
  std::vector<std::vector<std::vector<std::size_t>>> postings_;
};

}  // namespace dher
