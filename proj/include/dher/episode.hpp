#pragma once
#include <vector>

#include "dher/goal.hpp"
#include "dher/state.hpp"

namespace dher {

enum class DialogueOutcome : int { kOngoing = 0, kSuccess, kFailure };

// One system turn: the state the policy saw, the act it chose, the user's
// reply, and the resulting state. Acts are kept alongside the states so a
// finished dialogue can be re-assessed against other goals later.
struct Transition {
  DialogueState state;
  int action = 0;  // index into ActType
  DialogueAct sys_act;
  DialogueAct user_act;
  double reward = 0.0;
  DialogueState next_state;
  bool terminal = false;
};

// A complete (or truncated) dialogue against one goal.
struct Episode {
  Goal goal;
  std::vector<Transition> turns;
  DialogueOutcome outcome = DialogueOutcome::kOngoing;

  int length() const { return static_cast<int>(turns.size()); }
  double total_reward() const {
    double r = 0.0;
    for (const auto& t : turns) r += t.reward;
    return r;
  }
};

}  // namespace dher
