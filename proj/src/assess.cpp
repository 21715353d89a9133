#include "dher/assess.hpp"

#include <stdexcept>

namespace dher {

namespace {

bool newly_identified(const DialogueState& before, const DialogueState& after, SlotId s) {
  return after.identified(s) && !before.identified(s);
}

// Did the final turn move anything forward (any slot, not just the goal's)?
bool last_turn_contributed(const Episode& prefix) {
  const Transition& t = prefix.turns.back();
  if (t.next_state.answered.size() > t.state.answered.size()) return true;
  for (const auto& [s, v] : t.next_state.stated)
    if (newly_identified(t.state, t.next_state, s)) return true;
  return false;
}

}  // namespace

bool assess_success(const Goal& goal, const Episode& prefix, const KnowledgeBase& kb) {
  if (prefix.turns.empty()) throw std::invalid_argument("cannot assess an empty prefix");
  const SlotSchema& schema = kb.schema();
  for (const auto& [s, v] : goal.constraints)
    if (s < 0 || s >= schema.size() || v < 0 || v >= schema.slot(s).num_values)
      throw std::invalid_argument("goal constraint outside the episode's schema");
  for (SlotId s : goal.requests)
    if (s < 0 || s >= schema.size())
      throw std::invalid_argument("goal request outside the episode's schema");

  const DialogueState& last = prefix.turns.back().next_state;

  // (a) constraints stated and believed
  for (const auto& [s, v] : goal.constraints) {
    auto it = last.stated.find(s);
    if (it == last.stated.end() || it->second != v) return false;
    if (last.argmax(s) != v) return false;
  }

  // (b) requests answered with KB-consistent values
  for (SlotId r : goal.requests) {
    bool answered = false;
    for (const Transition& t : prefix.turns) {
      if (!t.next_state.answered.count(r) || t.state.answered.count(r)) continue;
      const ValueId v = t.next_state.answered.at(r);
      // consistency against rows matching what was identified when answering
      for (std::size_t row : kb.matching_rows(t.state.identified_constraints()))
        if (kb.row(row)[r] == v) {
          answered = true;
          break;
        }
      break;  // first answer is the one that counts
    }
    if (!answered) return false;
  }

  // (c) no wrong informs about the goal's constraint slots
  for (const Transition& t : prefix.turns) {
    if (t.sys_act.type != ActType::kInform) continue;
    for (const auto& [s, v] : t.sys_act.payload) {
      auto it = goal.constraints.find(s);
      if (it != goal.constraints.end() && v && *v != it->second) return false;
    }
  }

  // (d) the prefix must end on a turn that achieved something
  return last_turn_contributed(prefix);
}

}  // namespace dher
