#include "dher/her.hpp"

#include <stdexcept>

namespace dher {

void HerConfig::validate(int max_goal_size) const {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  if (!(alpha * max_goal_size < r_max))
    throw std::invalid_argument("alpha * largest possible subgoal must stay below r_max");
  if (kl_threshold <= 0.0) throw std::invalid_argument("kl_threshold must be positive");
  if (max_stitches_per_dialogue < 1 || max_turns < 2)
    throw std::invalid_argument("stitch/turn limits out of range");
  if (tail_reuse_limit < 1) throw std::invalid_argument("tail_reuse_limit must be at least 1");
}

namespace {
// Questions the user has voiced that the system has not yet answered. Belief
// KL alone cannot see these: a stitch joining a backlog-carrying head to a
// backlog-free tail would depict a deal closing over unanswered questions.
std::set<SlotId> open_requests(const DialogueState& st) {
  std::set<SlotId> open = st.requested;
  for (const auto& [slot, value] : st.answered) open.erase(slot);
  return open;
}
}  // namespace

double segment_reward(const Goal& subgoal, const HerConfig& cfg) {
  if (subgoal.empty()) throw std::invalid_argument("segment_reward of an empty subgoal");
  const double r = cfg.alpha * subgoal.size();
  if (!(r < cfg.r_max))
    throw std::invalid_argument("segment reward reached r_max; lower alpha");
  return r;
}

std::vector<Episode> trim_her(const Episode& episode, const AssessFn& assess,
                              const HerConfig& cfg) {
  std::vector<Episode> out;
  for (SegmentPair& pair : segment_dialogue(episode, assess).pairs) {
    Episode e = std::move(pair.segment);
    e.goal = pair.subgoal;
    e.outcome = DialogueOutcome::kSuccess;
    for (Transition& t : e.turns) {
      t.reward = -1.0;
      t.terminal = false;
    }
    e.turns.back().reward = -1.0 + segment_reward(pair.subgoal, cfg);
    e.turns.back().terminal = true;
    out.push_back(std::move(e));
  }
  return out;
}

Episode dialogue_subtract(const Episode& whole, const Episode& head) {
  if (head.turns.size() > whole.turns.size())
    throw std::invalid_argument("head longer than the dialogue it came from");
  for (std::size_t i = 0; i < head.turns.size(); ++i) {
    const Transition& a = head.turns[i];
    const Transition& b = whole.turns[i];
    if (a.action != b.action || !(a.sys_act == b.sys_act) || !(a.user_act == b.user_act))
      throw std::invalid_argument("head is not a prefix of the dialogue");
  }
  Episode tail;
  tail.goal = whole.goal;
  tail.outcome = whole.outcome;
  tail.turns.assign(whole.turns.begin() + head.turns.size(), whole.turns.end());
  return tail;
}

TailPool::TailPool(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("tail pool capacity must be positive");
}

void TailPool::insert(Episode tail, Goal subgoal, Goal source_goal) {
  if (tail.turns.empty()) return;  // nothing to stitch with
  TailEntry e;
  e.tail = std::move(tail);
  e.subgoal = subgoal;
  e.source_goal = std::move(source_goal);
  e.id = next_id_++;
  buckets_[std::move(subgoal)].push_back(e.id);
  entries_.push_back(std::move(e));
  if (entries_.size() > capacity_) entries_.pop_front();  // bucket ids pruned lazily
}

const TailEntry* TailPool::find_match(const Goal& subgoal, const DialogueState& junction,
                                      int head_len, const HerConfig& cfg) const {
  auto it = buckets_.find(subgoal);
  if (it == buckets_.end()) return nullptr;
  auto& ids = it->second;
  const std::uint64_t oldest = entries_.empty() ? next_id_ : entries_.front().id;
  while (!ids.empty() && ids.front() < oldest) ids.pop_front();  // evicted entries
  // Among all admissible candidates, prefer the shortest tail (it carries the
  // most concentrated finish-the-deal signal), then the closest junction.
  const TailEntry* best = nullptr;
  double best_kl = 0.0;
  const std::set<SlotId> backlog = open_requests(junction);
  for (std::uint64_t id : ids) {
    const TailEntry& e = entries_[id - oldest];
    if (e.uses >= cfg.tail_reuse_limit) continue;
    if (head_len + e.tail.length() > cfg.max_turns) continue;
    if (open_requests(e.tail.turns.front().state) != backlog) continue;
    const double kl = state_kl(junction, e.tail.turns.front().state, cfg.kl_aggregate);
    if (kl > cfg.kl_threshold) continue;
    if (!best || e.tail.length() < best->tail.length() ||
        (e.tail.length() == best->tail.length() && kl < best_kl)) {
      best = &e;
      best_kl = kl;
    }
  }
  if (best) ++best->uses;
  return best;
}

bool stitchable(const SegmentPair& head, const TailEntry& tail, double eps, KlAggregate agg) {
  if (!(head.subgoal == tail.subgoal)) return false;
  const DialogueState& junction = head.segment.turns.back().next_state;
  const DialogueState& opening = tail.tail.turns.front().state;
  if (open_requests(junction) != open_requests(opening)) return false;
  return state_kl(junction, opening, agg) <= eps;
}

Episode concatenate(const Episode& head, const TailEntry& tail, const HerConfig& cfg) {
  const int h = head.length();
  if (h == 0 || tail.tail.length() == 0)
    throw std::invalid_argument("cannot concatenate an empty segment");
  if (h + tail.tail.length() > cfg.max_turns)
    throw std::invalid_argument("stitched dialogue would exceed the turn cap");

  Episode out;
  out.goal = tail.source_goal;
  out.outcome = DialogueOutcome::kSuccess;
  out.turns = head.turns;
  for (int j = 0; j < tail.tail.length(); ++j) {
    Transition t = tail.tail.turns[j];
    t.state.turn = h + j;
    t.next_state.turn = h + j + 1;
    out.turns.push_back(std::move(t));
  }
  // the seam: the head's last turn now lands in the tail's opening state
  out.turns[h - 1].next_state = out.turns[h].state;
  for (Transition& t : out.turns) {
    t.reward = -1.0;
    t.terminal = false;
  }
  out.turns.back().reward = -1.0 + cfg.r_max;
  out.turns.back().terminal = true;
  return out;
}

std::vector<StitchRecord> stitch_her(const Episode& episode, TailPool& pool,
                                     const AssessFn& assess, const HerConfig& cfg,
                                     StitchStats* stats) {
  StitchStats local;
  StitchStats& st = stats ? *stats : local;
  std::vector<StitchRecord> out;

  SegmentationResult seg = segment_dialogue(episode, assess);
  const bool success = assess(episode.goal, episode);

  if (success) {
    for (const SegmentPair& pair : seg.pairs) {
      Episode tail = dialogue_subtract(episode, pair.segment);
      if (tail.turns.empty()) continue;  // the full-goal pair
      pool.insert(std::move(tail), pair.subgoal, episode.goal);
    }
    return out;
  }

  int attempted_here = 0;
  for (const SegmentPair& pair : seg.pairs) {
    if (attempted_here >= cfg.max_stitches_per_dialogue) break;
    const DialogueState& junction = pair.segment.turns.back().next_state;
    const TailEntry* match = pool.find_match(pair.subgoal, junction, pair.segment.length(), cfg);
    if (!match) continue;  // next head; one candidate each

    ++attempted_here;
    ++st.attempted;
    Episode stitched = concatenate(pair.segment, *match, cfg);
    if (assess(match->source_goal, stitched)) {
      ++st.generated;
      StitchRecord rec;
      rec.episode = std::move(stitched);
      rec.subgoal = pair.subgoal;
      rec.head_len = pair.segment.length();
      rec.junction_kl = state_kl(junction, match->tail.turns.front().state, cfg.kl_aggregate);
      rec.head_junction = junction;
      rec.tail_first = match->tail.turns.front().state;
      out.push_back(std::move(rec));
    } else {
      ++st.discarded;
    }
  }
  return out;
}

}  // namespace dher
