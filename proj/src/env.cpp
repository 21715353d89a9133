#include "dher/env.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace dher {

void EnvConfig::validate(const SlotSchema& schema) const {
  if (!(success_bonus > 0.0) || !(failure_penalty < 0.0))
    throw std::invalid_argument("need success_bonus > 0 > failure_penalty");
  if (max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");
  if (belief_noise < 0.0 || belief_noise >= 0.5)
    throw std::invalid_argument("belief_noise outside [0, 0.5)");
  int largest = 0;
  for (SlotId s = 0; s < schema.size(); ++s)
    largest = std::max(largest, schema.slot(s).num_values);
  if (smoothing_floor <= 0.0 || smoothing_floor >= 1.0 / largest)
    throw std::invalid_argument("smoothing_floor outside (0, 1/|largest value domain|)");
  if (ema_rate <= 0.0 || ema_rate > 1.0) throw std::invalid_argument("ema_rate outside (0, 1]");
  if (noise_fraction_lo < 0.0 || noise_fraction_hi >= 0.5 || noise_fraction_lo > noise_fraction_hi)
    throw std::invalid_argument("noise fraction range invalid (must stay below 0.5)");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (bad_book_limit < 1) throw std::invalid_argument("bad_book_limit must be >= 1");
  if (volunteer_prob < 0.0 || volunteer_prob > 1.0)
    throw std::invalid_argument("volunteer_prob outside [0, 1]");
  if (goal_max_constraints < 1 ||
      goal_max_constraints > static_cast<int>(schema.informable_slots().size()))
    throw std::invalid_argument("goal_max_constraints out of range for schema");
}

namespace {

// q_i = (1 - floor*dim) * p_i + floor: exact floor with exact unit sum.
void smooth_floor(std::vector<double>& p, double floor) {
  const double scale = 1.0 - floor * static_cast<double>(p.size());
  for (double& x : p) x = scale * x + floor;
}

void ema_blend(std::vector<double>& belief, const std::vector<double>& obs, double rate) {
  for (std::size_t i = 0; i < belief.size(); ++i)
    belief[i] = (1.0 - rate) * belief[i] + rate * obs[i];
}

}  // namespace

void apply_statement(DialogueState& st, SlotId s, ValueId v, const SlotSchema& schema,
                     const EnvConfig& cfg, RandomStream& rng) {
  const auto& spec = schema.slot(s);
  std::vector<double> obs(spec.belief_dim(), 0.0);
  if (v == spec.dontcare_id()) {
    // "whatever you have": half on dontcare, the rest spread over values
    obs[v] = 0.5;
    for (ValueId c = 0; c < spec.num_values; ++c) obs[c] += 0.5 / spec.num_values;
  } else {
    obs[v] = 1.0;
  }
  if (spec.num_values >= 2 && rng.bernoulli(cfg.belief_noise)) {
    // Mis-recognition: the recognizer confidently hears a different value,
    // leaving only a sliver of mass on what was actually said. The belief
    // argmax flips until a later statement re-grounds the slot.
    ValueId wrong = static_cast<ValueId>(rng.uniform_index(spec.num_values));
    if (wrong == v) wrong = (wrong + 1) % spec.num_values;
    const double f = rng.uniform(cfg.noise_fraction_lo, cfg.noise_fraction_hi);
    for (double& x : obs) x *= f;
    obs[wrong] += 1.0 - f;
  }
  smooth_floor(obs, cfg.smoothing_floor);
  ema_blend(st.beliefs[s], obs, cfg.ema_rate);
  st.stated[s] = v;
  st.last_stated = s;
}

namespace {

// System-provided value (an answer, not a user statement): clean point mass.
void apply_answer_belief(DialogueState& st, SlotId s, ValueId v, const SlotSchema& schema,
                         const EnvConfig& cfg) {
  const auto& spec = schema.slot(s);
  std::vector<double> obs(spec.belief_dim(), 0.0);
  obs[v] = 1.0;
  smooth_floor(obs, cfg.smoothing_floor);
  ema_blend(st.beliefs[s], obs, cfg.ema_rate);
}

}  // namespace

DialogueAct system_act_for(ActType t, const DialogueState& st, const KnowledgeBase& kb,
                           const SlotSchema& schema) {
  DialogueAct act;
  act.type = t;
  switch (t) {
    case ActType::kRequest:
    case ActType::kMultipleChoice:
      // Target the first constraint slot whose belief is not pinned to what
      // the user said -- never stated, or stated but mis-recognized. Asking
      // again is the only way to repair a flipped belief.
      for (SlotId s : schema.informable_slots())
        if (!st.identified(s)) {
          act.payload[s] = std::nullopt;
          break;
        }
      break;
    case ActType::kInform: {
      for (SlotId s : st.requested) {
        if (s == schema.booking_slot() || st.answered.count(s)) continue;
        const std::size_t row = kb.first_match(st.identified_constraints());
        if (row != KnowledgeBase::npos) act.payload[s] = kb.row(row)[s];
        break;
      }
      break;
    }
    case ActType::kConfirmQuestion:
      if (st.last_stated) act.payload[*st.last_stated] = st.argmax(*st.last_stated);
      break;
    case ActType::kBook: {
      const std::size_t row = kb.first_match(st.identified_constraints());
      if (row != KnowledgeBase::npos) {
        for (SlotId s = 0; s < schema.size(); ++s) act.payload[s] = kb.row(row)[s];
        act.payload[schema.booking_slot()] = 0;  // "granted"
      }
      break;
    }
    default:
      break;  // greeting/thanks/closing/deny/confirm_answer/not_sure carry nothing
  }
  return act;
}

int rule_policy_action(const DialogueState& st, const SlotSchema& schema) {
  for (SlotId s : schema.informable_slots())
    if (!st.identified(s)) return static_cast<int>(ActType::kRequest);
  for (SlotId s : st.requested)
    if (s != schema.booking_slot() && !st.answered.count(s))
      return static_cast<int>(ActType::kInform);
  // every slot profiled and every voiced question answered: close the deal
  if (!st.requested.empty()) return static_cast<int>(ActType::kBook);
  return static_cast<int>(ActType::kThanks);  // invite whatever they still want
}

void UserSimulator::reset(const Goal& goal, RandomStream& rng) {
  goal_ = goal;
  pending_constraints_.assign(goal.constraints.size(), 0);
  std::size_t i = 0;
  for (const auto& [s, v] : goal.constraints) pending_constraints_[i++] = s;
  rng.shuffle(pending_constraints_);
  pending_requests_.clear();
  for (SlotId s : goal.requests)
    if (s != schema_->booking_slot()) pending_requests_.push_back(s);
  rng.shuffle(pending_requests_);
  pending_requests_.push_back(schema_->booking_slot());
  dontcared_.clear();
  no_progress_ = 0;
  bad_books_ = 0;
}

bool UserSimulator::book_acceptable(const DialogueAct& sys) const {
  if (sys.payload.empty() || !pending_constraints_.empty()) return false;
  // no deal while a question is still open: answers come before commitment
  for (SlotId s : pending_requests_)
    if (s != schema_->booking_slot()) return false;
  for (const auto& [s, v] : goal_.constraints) {
    auto it = sys.payload.find(s);
    if (it == sys.payload.end() || !it->second || *it->second != v) return false;
  }
  for (SlotId s : pending_requests_) {
    auto it = sys.payload.find(s);
    if (it == sys.payload.end() || !it->second) return false;
  }
  return true;
}

DialogueAct UserSimulator::volunteer_or_request(bool& progress, RandomStream& rng) {
  DialogueAct act;
  if (!pending_constraints_.empty() && rng.bernoulli(cfg_->volunteer_prob)) {
    act.type = ActType::kInform;
    int n = 1;
    if (pending_constraints_.size() >= 2 && rng.bernoulli(cfg_->volunteer_two_prob)) n = 2;
    for (int k = 0; k < n; ++k) {
      SlotId s = pending_constraints_.front();
      pending_constraints_.erase(pending_constraints_.begin());
      act.payload[s] = goal_.constraints.at(s);
    }
    progress = true;
  } else {
    // Nag about every question, answered or not ("and that was the 7pm
    // showing, right?"). The booking itself is never voiced: the system has
    // to read readiness off the dialogue state, not off a literal cue.
    act.type = ActType::kRequest;
    for (SlotId s : goal_.requests)
      if (s != schema_->booking_slot()) act.payload[s] = std::nullopt;
    if (act.payload.empty()) act.type = ActType::kThanks;  // no side questions
  }
  return act;
}

UserSimulator::Reply UserSimulator::respond(const DialogueAct& sys, const DialogueState& st,
                                            RandomStream& rng) {
  Reply r;
  bool progress = false;

  // sync agenda with anything the system act just answered
  for (auto it = pending_requests_.begin(); it != pending_requests_.end();) {
    if (st.answered.count(*it)) {
      it = pending_requests_.erase(it);
      progress = true;
    } else {
      ++it;
    }
  }

  switch (sys.type) {
    case ActType::kClosing:
      r.act.type = ActType::kClosing;  // hung up on: the task is dead
      r.outcome = DialogueOutcome::kFailure;
      return r;

    case ActType::kBook:
      if (book_acceptable(sys)) {
        r.act.type = ActType::kClosing;
        r.outcome = DialogueOutcome::kSuccess;
        r.accepted_book = true;
        pending_requests_.clear();
        return r;
      }
      if (++bad_books_ >= cfg_->bad_book_limit) {
        r.act.type = ActType::kClosing;  // offered the wrong thing once too often
        r.outcome = DialogueOutcome::kFailure;
        return r;
      }
      // A bungled booking is never progress, and the user does not explain
      // what was wrong with it: the refusal itself is the only feedback.
      r.act.type = ActType::kDeny;
      break;

    case ActType::kRequest:
    case ActType::kMultipleChoice: {
      if (sys.payload.empty()) {
        r.act = volunteer_or_request(progress, rng);
        break;
      }
      const SlotId s = sys.payload.begin()->first;
      if (goal_.constraints.count(s)) {
        r.act.type = ActType::kInform;
        r.act.payload[s] = goal_.constraints.at(s);
        auto it = std::find(pending_constraints_.begin(), pending_constraints_.end(), s);
        if (it != pending_constraints_.end()) {
          pending_constraints_.erase(it);
          progress = true;
        }
        if (!pending_constraints_.empty() && rng.bernoulli(cfg_->volunteer_two_prob)) {
          SlotId extra = pending_constraints_.front();
          pending_constraints_.erase(pending_constraints_.begin());
          r.act.payload[extra] = goal_.constraints.at(extra);
          progress = true;
        }
      } else if (schema_->slot(s).informable) {
        r.act.type = ActType::kNotSure;
        r.act.payload[s] = schema_->slot(s).dontcare_id();
        if (dontcared_.insert(s).second) progress = true;
      } else {
        r.act = volunteer_or_request(progress, rng);
      }
      break;
    }

    case ActType::kConfirmQuestion: {
      if (sys.payload.empty() || !sys.payload.begin()->second) {
        r.act = volunteer_or_request(progress, rng);
        break;
      }
      const SlotId s = sys.payload.begin()->first;
      const ValueId v = *sys.payload.begin()->second;
      if (goal_.constraints.count(s)) {
        const ValueId truth = goal_.constraints.at(s);
        r.act.type = v == truth ? ActType::kConfirmAnswer : ActType::kDeny;
        r.act.payload[s] = truth;
        auto it = std::find(pending_constraints_.begin(), pending_constraints_.end(), s);
        if (it != pending_constraints_.end()) {
          pending_constraints_.erase(it);
          progress = true;
        }
      } else if (schema_->slot(s).informable) {
        const ValueId dc = schema_->slot(s).dontcare_id();
        r.act.type = v == dc ? ActType::kConfirmAnswer : ActType::kNotSure;
        r.act.payload[s] = dc;
        if (dontcared_.insert(s).second) progress = true;
      } else {
        r.act = volunteer_or_request(progress, rng);
      }
      break;
    }

    default:
      // inform (handled by the agenda sync above), greeting, thanks, etc.:
      // keep the dialogue moving from the user's side
      r.act = volunteer_or_request(progress, rng);
      break;
  }

  if (r.act.type == ActType::kClosing) {  // agenda ran dry: user is satisfied
    r.outcome = DialogueOutcome::kSuccess;
    return r;
  }
  no_progress_ = progress ? 0 : no_progress_ + 1;
  if (no_progress_ >= cfg_->patience) {
    r.act = DialogueAct{};
    r.act.type = ActType::kClosing;  // fed up: abandon
    r.outcome = DialogueOutcome::kFailure;
  }
  return r;
}

Environment::Environment(const SlotSchema* schema, const KnowledgeBase* kb, EnvConfig cfg,
                         std::uint64_t seed)
    : schema_(schema),
      kb_(kb),
      cfg_(cfg),
      rng_(RandomStream::derive(seed, /*tag=*/0x656e76u)),  // "env"
      sim_(schema, &cfg_) {
  cfg_.validate(*schema_);
  if (kb_->size() == 0) throw std::invalid_argument("environment needs a non-empty KB");
}

const DialogueState& Environment::reset() {
  return reset(kb_->sample_goal(rng_, cfg_.goal_max_constraints));
}

const DialogueState& Environment::reset(const Goal& goal) {
  begin(goal);
  return state_;
}

void Environment::begin(const Goal& goal) {
  state_ = DialogueState::initial(*schema_, cfg_.smoothing_floor, static_cast<int>(kb_->size()));
  sim_.reset(goal, rng_);
  episode_ = Episode{};
  episode_.goal = goal;
  done_ = false;
  DialogueAct hello;
  hello.type = ActType::kGreeting;
  apply_user_act(hello);  // user opens; turn counter stays at 0
}

void Environment::apply_system_act(const DialogueAct& act) {
  state_.last_sys_act = act.type;
  state_.last_sys_slots.clear();
  for (const auto& [s, v] : act.payload) state_.last_sys_slots.insert(s);
  if (act.type == ActType::kInform) {
    for (const auto& [s, v] : act.payload) {
      if (!v || schema_->slot(s).informable || state_.answered.count(s)) continue;
      state_.answered[s] = *v;
      apply_answer_belief(state_, s, *v, *schema_, cfg_);
    }
  }
}

void Environment::apply_user_act(const DialogueAct& act) {
  state_.last_user_act = act.type;
  state_.last_user_slots.clear();
  for (const auto& [s, v] : act.payload) state_.last_user_slots.insert(s);
  for (const auto& [s, v] : act.payload) {
    if (v && schema_->slot(s).informable) apply_statement(state_, s, *v, *schema_, cfg_, rng_);
    if (!v && act.type == ActType::kRequest) state_.requested.insert(s);
  }
}

void Environment::refresh_kb_count() {
  state_.kb_match_count =
      static_cast<int>(kb_->matching_rows(state_.identified_constraints()).size());
}

Environment::StepResult Environment::step(int action_index) {
  if (done_) throw std::logic_error("step on a finished dialogue");
  if (action_index < 0 || action_index >= kNumActTypes)
    throw std::invalid_argument("action index outside the act inventory");

  Transition tr;
  tr.state = state_;
  tr.action = action_index;
  tr.sys_act = system_act_for(static_cast<ActType>(action_index), state_, *kb_, *schema_);

  apply_system_act(tr.sys_act);
  UserSimulator::Reply reply = sim_.respond(tr.sys_act, state_, rng_);
  if (reply.accepted_book) {
    for (const auto& [s, v] : tr.sys_act.payload) {
      if (!v || schema_->slot(s).informable || state_.answered.count(s)) continue;
      state_.answered[s] = *v;
      apply_answer_belief(state_, s, *v, *schema_, cfg_);
    }
  }
  apply_user_act(reply.act);
  state_.turn += 1;
  refresh_kb_count();

  DialogueOutcome outcome = reply.outcome;
  if (outcome == DialogueOutcome::kOngoing && state_.turn >= cfg_.max_turns)
    outcome = DialogueOutcome::kFailure;  // ran out the clock

  double reward = cfg_.per_turn_cost;
  if (outcome == DialogueOutcome::kSuccess) reward += cfg_.success_bonus;
  if (outcome == DialogueOutcome::kFailure) reward += cfg_.failure_penalty;

  tr.user_act = reply.act;
  tr.reward = reward;
  tr.terminal = outcome != DialogueOutcome::kOngoing;
  tr.next_state = state_;
  episode_.turns.push_back(std::move(tr));
  episode_.outcome = outcome;
  done_ = episode_.turns.back().terminal;
  return StepResult{reward, done_, outcome};
}

std::string Environment::signature() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "slots=%d|kb=%zu|bonus=%g|penalty=%g|cost=%g|cap=%d|noise=%g|nf=%g:%g|floor=%g|"
                "ema=%g|patience=%d|badbook=%d|vol=%g|v2=%g|maxc=%d",
                schema_->size(), kb_->size(), cfg_.success_bonus, cfg_.failure_penalty,
                cfg_.per_turn_cost, cfg_.max_turns, cfg_.belief_noise, cfg_.noise_fraction_lo,
                cfg_.noise_fraction_hi, cfg_.smoothing_floor, cfg_.ema_rate, cfg_.patience,
                cfg_.bad_book_limit, cfg_.volunteer_prob, cfg_.volunteer_two_prob,
                cfg_.goal_max_constraints);
  return std::string(buf);
}

}  // namespace dher
