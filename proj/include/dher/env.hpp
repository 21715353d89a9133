#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dher/episode.hpp"
#include "dher/kb.hpp"
#include "dher/rng.hpp"

namespace dher {

struct EnvConfig {
  double success_bonus = 80.0;
  double failure_penalty = -40.0;  // added on failed terminal turns
  double per_turn_cost = -1.0;
  int max_turns = 40;
  // Chance that a user statement partly bleeds onto one wrong value, and the
  // bled mass fraction range. Keeps beliefs soft without flipping the argmax.
  double belief_noise = 0.25;
  double noise_fraction_lo = 0.1;
  double noise_fraction_hi = 0.4;
  double smoothing_floor = 0.01;
  double ema_rate = 0.8;  // weight of the newest observation in belief updates
  // User behavior.
  int patience = 6;                 // consecutive no-progress turns before abandoning
  int bad_book_limit = 1;           // wrong bookings tolerated before walking out
  double volunteer_prob = 0.2;      // chance of volunteering unprompted on a filler turn
  double volunteer_two_prob = 0.3;  // chance of volunteering two constraints at once
  int goal_max_constraints = 5;

  void validate(const SlotSchema& schema) const;  // throws std::invalid_argument
};

// Fold one user statement (slot s has value v) into the belief for s:
// noised, floored point mass blended in with an exponential moving average.
// Also updates the stated/last_stated ledgers.
void apply_statement(DialogueState& st, SlotId s, ValueId v, const SlotSchema& schema,
                     const EnvConfig& cfg, RandomStream& rng);

// Payload construction for a system act type chosen by the policy.
DialogueAct system_act_for(ActType t, const DialogueState& st, const KnowledgeBase& kb,
                           const SlotSchema& schema);

// Hand-coded policy used for warm-start data collection: request unheard
// constraint slots in schema order, answer open user requests, then book.
int rule_policy_action(const DialogueState& st, const SlotSchema& schema);

// Agenda-style simulated user: cooperative and consistent. Conveys its
// constraints, answers truthfully, denies wrong bookings, re-requests
// unanswered slots, and walks away after too many fruitless turns.
class UserSimulator {
public:
  UserSimulator(const SlotSchema* schema, const EnvConfig* cfg) : schema_(schema), cfg_(cfg) {}

  void reset(const Goal& goal, RandomStream& rng);

  struct Reply {
    DialogueAct act;
    DialogueOutcome outcome = DialogueOutcome::kOngoing;
    bool accepted_book = false;
  };
  // Decide the reply to `sys`. `st` is the dialogue state after the system
  // act was applied (so freshly answered slots are visible).
  Reply respond(const DialogueAct& sys, const DialogueState& st, RandomStream& rng);

  const Goal& goal() const { return goal_; }
  int pending_constraints() const { return static_cast<int>(pending_constraints_.size()); }
  int pending_requests() const { return static_cast<int>(pending_requests_.size()); }

private:
  DialogueAct volunteer_or_request(bool& progress, RandomStream& rng);
  bool book_acceptable(const DialogueAct& sys) const;

  const SlotSchema* schema_;
  const EnvConfig* cfg_;
  Goal goal_;
  std::vector<SlotId> pending_constraints_;
  std::vector<SlotId> pending_requests_;  // booking slot kept last
  std::set<SlotId> dontcared_;            // non-goal slots already waved off
  int no_progress_ = 0;
  int bad_books_ = 0;
};

// One dialogue at a time against one goal; accumulates the episode.
class Environment {
public:
  Environment(const SlotSchema* schema, const KnowledgeBase* kb, EnvConfig cfg,
              std::uint64_t seed);

  const DialogueState& reset();                 // fresh sampled goal
  const DialogueState& reset(const Goal& goal);  // caller-chosen goal

  struct StepResult {
    double reward = 0.0;
    bool terminal = false;
    DialogueOutcome outcome = DialogueOutcome::kOngoing;
  };
  StepResult step(int action_index);

  const DialogueState& state() const { return state_; }
  const Goal& goal() const { return episode_.goal; }
  bool done() const { return done_; }
  const Episode& episode() const { return episode_; }
  Episode take_episode() { return std::move(episode_); }
  const EnvConfig& config() const { return cfg_; }
  const SlotSchema& schema() const { return *schema_; }
  const KnowledgeBase& kb() const { return *kb_; }
  RandomStream& rng() { return rng_; }

  // Fingerprint of everything that shapes dialogue dynamics; comparisons
  // across differing environments are refused by the harness.
  std::string signature() const;

private:
  void begin(const Goal& goal);
  void apply_system_act(const DialogueAct& act);
  void apply_user_act(const DialogueAct& act);
  void refresh_kb_count();

  const SlotSchema* schema_;
  const KnowledgeBase* kb_;
  EnvConfig cfg_;
  RandomStream rng_;
  UserSimulator sim_;
  DialogueState state_;
  Episode episode_;
  bool done_ = true;
};

}  // namespace dher
