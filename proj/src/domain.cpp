#include "dher/acts.hpp"
#include "dher/goal.hpp"
#include "dher/schema.hpp"

namespace dher {

SlotSchema desk_schema() {
  // Informables stay at the small end of the 4..10 value range: goals then
  // repeat across episodes, which is what gives relabeled segments a chance
  // to transfer between dialogues.
  std::vector<SlotSpec> slots = {
      {"actor", 4, true, false},
      {"genre", 4, true, false},
      {"date", 4, true, false},
      {"city", 4, true, false},
      {"num_people", 4, true, false},
      {"movie_name", 6, false, true},
      {"start_time", 5, false, true},
      {"ticket", 1, false, true},
  };
  return SlotSchema(std::move(slots), 7);
}

SlotSchema full_schema() {
  // 29 slots: 20 informable constraints, 8 extra requestables, 1 booking slot.
  std::vector<SlotSpec> slots;
  for (int i = 0; i < 20; ++i)
    slots.push_back({"c" + std::to_string(i), 4 + (i % 3), true, false});
  for (int i = 0; i < 8; ++i)
    slots.push_back({"r" + std::to_string(i), 5 + (i % 2), false, true});
  slots.push_back({"ticket", 1, false, true});
  return SlotSchema(std::move(slots), 28);
}

const char* act_name(ActType t) {
  switch (t) {
    case ActType::kRequest: return "request";
    case ActType::kInform: return "inform";
    case ActType::kConfirmQuestion: return "confirm_question";
    case ActType::kConfirmAnswer: return "confirm_answer";
    case ActType::kDeny: return "deny";
    case ActType::kThanks: return "thanks";
    case ActType::kClosing: return "closing";
    case ActType::kGreeting: return "greeting";
    case ActType::kNotSure: return "not_sure";
    case ActType::kMultipleChoice: return "multiple_choice";
    case ActType::kBook: return "book";
  }
  return "?";
}

std::optional<ActType> act_from_name(const std::string& name) {
  for (int i = 0; i < kNumActTypes; ++i)
    if (name == act_name(static_cast<ActType>(i))) return static_cast<ActType>(i);
  return std::nullopt;
}

std::string to_string(const DialogueAct& act, const SlotSchema& schema) {
  std::string out = act_name(act.type);
  out += "(";
  bool first = true;
  for (const auto& [slot, val] : act.payload) {
    if (!first) out += ", ";
    first = false;
    out += schema.slot(slot).name;
    if (val) {
      out += "=";
      if (*val == schema.slot(slot).dontcare_id()) out += "dontcare";
      else if (*val == schema.slot(slot).unknown_id()) out += "unknown";
      else out += std::to_string(*val);
    }
  }
  out += ")";
  return out;
}

bool is_subgoal(const Goal& sub, const Goal& g) {
  if (sub.empty()) return false;
  if (sub == g) return false;
  for (const auto& [s, v] : sub.constraints) {
    auto it = g.constraints.find(s);
    if (it == g.constraints.end() || it->second != v) return false;
  }
  for (SlotId s : sub.requests)
    if (!g.requests.count(s)) return false;
  return true;
}

std::uint64_t count_subgoals(int c, int r) {
  if (c < 0 || r < 0) throw std::invalid_argument("negative goal component count");
  if (c + r == 0) return 0;  // empty goal: no non-empty subsets at all
  return (1ull << c) * (1ull << r) - 2;
}

}  // namespace dher
