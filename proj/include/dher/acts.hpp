#pragma once
#include <map>
#include <optional>
#include <string>

#include "dher/schema.hpp"

namespace dher {

// The eleven dialogue act types both sides draw from. The system policy
// picks one per turn; payload slots/values are filled by domain rules.
enum class ActType : int {
  kRequest = 0,
  kInform,
  kConfirmQuestion,
  kConfirmAnswer,
  kDeny,
  kThanks,
  kClosing,
  kGreeting,
  kNotSure,
  kMultipleChoice,
  kBook,
};

inline constexpr int kNumActTypes = 11;

const char* act_name(ActType t);
std::optional<ActType> act_from_name(const std::string& name);

// One dialogue act. Payload maps slot -> value; a slot mentioned with no
// value (plain request) is stored as nullopt.
struct DialogueAct {
  ActType type = ActType::kGreeting;
  std::map<SlotId, std::optional<ValueId>> payload;

  bool operator==(const DialogueAct& o) const { return type == o.type && payload == o.payload; }
};

std::string to_string(const DialogueAct& act, const SlotSchema& schema);

}  // namespace dher
