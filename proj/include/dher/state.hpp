#pragma once
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "dher/acts.hpp"
#include "dher/schema.hpp"

namespace dher {

// Dialogue state the policy conditions on. Encoded form has five components:
// last user act (type + slots), last system act (type + slots), per-slot
// beliefs, turn features, and a matching-row count from the backend.
struct DialogueState {
  int turn = 0;
  // beliefs[s] is a distribution over slot s's values + dontcare + unknown.
  // Entries are floored at the smoothing floor, so they are never zero.
  std::vector<std::vector<double>> beliefs;
  // Latest value the user gave for each informable slot (may be dontcare).
  std::map<SlotId, ValueId> stated;
  std::optional<SlotId> last_stated;
  // Slots the user has asked the system for.
  std::set<SlotId> requested;
  // Requested slots the system has answered, with the value given.
  std::map<SlotId, ValueId> answered;
  std::optional<ActType> last_sys_act;
  std::set<SlotId> last_sys_slots;
  std::optional<ActType> last_user_act;
  std::set<SlotId> last_user_slots;
  // Backend rows consistent with the identified constraints.
  int kb_match_count = 0;
  int kb_total = 0;

  static DialogueState initial(const SlotSchema& schema, double smoothing_floor, int kb_rows);

  // Belief argmax for a slot; ties break to the lowest value id.
  ValueId argmax(SlotId s) const;

  // A slot counts as identified once the user stated it and the belief
  // argmax agrees with the statement.
  bool identified(SlotId s) const;

  // stated-and-identified bindings, as used to filter the backend.
  std::map<SlotId, ValueId> identified_constraints() const;
};

// Width of the feature vector fed to the Q-network for this schema.
int encoded_dim(const SlotSchema& schema, int max_turns);

// Layout: user act one-hot, user act slots, system act one-hot, system act
// slots, all belief vectors, turn/max_turns scalar, turn one-hot, log-scaled
// matching-row count.
std::vector<float> encode_state(const DialogueState& st, const SlotSchema& schema, int max_turns);

// KL(p || q) in nats over one distribution. Zero mass in p contributes
// nothing; p>0 where q=0 is a domain error (the smoothing floor prevents it
// for real belief vectors).
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

// Sum (or max, if requested) of per-slot belief KLs between two states.
enum class KlAggregate { kSum, kMax };
double state_kl(const DialogueState& a, const DialogueState& b, KlAggregate agg = KlAggregate::kSum);

}  // namespace dher
