#pragma once
#include <cstdint>
#include <deque>
#include <map>
#include <optional>

#include "dher/segmentation.hpp"

namespace dher {

struct HerConfig {
  double alpha = 1.0;        // terminal reward per subgoal component
  double kl_threshold = 0.2;  // junction stitchability bound (nats)
  double r_max = 80.0;       // success bonus; also caps alpha * |subgoal|
  int max_stitches_per_dialogue = 8;
  // When successes are scarce, unlimited reuse floods the replay pool with
  // copies of the same few donor trajectories; a cap keeps stitched output
  // roughly as diverse as the donors actually are.
  int tail_reuse_limit = 8;
  std::size_t tail_pool_capacity = 2000;
  KlAggregate kl_aggregate = KlAggregate::kSum;
  int max_turns = 40;  // stitched dialogues may not exceed this

  // max_goal_size: largest |C|+|R| the goal sampler can produce.
  void validate(int max_goal_size) const;
};

// Terminal bonus of a relabeled segment: alpha * (|C'| + |R'|). Throws when
// the bonus would reach the full-success bonus r_max.
double segment_reward(const Goal& subgoal, const HerConfig& cfg);

// Relabel every valid head segment of `episode` as a successful dialogue for
// its subgoal: per-turn reward −1, terminal reward −1 + segment_reward.
std::vector<Episode> trim_her(const Episode& episode, const AssessFn& assess,
                              const HerConfig& cfg);

// Suffix of `whole` after removing `head`, which must be a turn-for-turn
// prefix (same actions and acts). head = whole yields an empty tail.
Episode dialogue_subtract(const Episode& whole, const Episode& head);

struct TailEntry {
  Episode tail;
  Goal subgoal;      // what the removed head had accomplished
  Goal source_goal;  // full goal of the successful donor dialogue
  std::uint64_t id = 0;
  mutable int uses = 0;  // times this tail has been handed out for stitching
};

// Γ: bounded FIFO store of tail segments from successful dialogues, indexed
// by subgoal for cheap candidate lookup.
class TailPool {
public:
  explicit TailPool(std::size_t capacity);

  void insert(Episode tail, Goal subgoal, Goal source_goal);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const TailEntry& entry(std::size_t i) const { return entries_.at(i); }  // insertion order

  // Best entry with equal subgoal, junction KL within threshold, and combined
  // length within the turn cap: shortest admissible tail, ties broken by
  // junction divergence. Over-long candidates are skipped, not errors.
  const TailEntry* find_match(const Goal& subgoal, const DialogueState& junction, int head_len,
                              const HerConfig& cfg) const;

private:
  std::size_t capacity_;
  std::uint64_t next_id_ = 0;
  std::deque<TailEntry> entries_;
  mutable std::map<Goal, std::deque<std::uint64_t>> buckets_;
};

// Def.-3 test: equal subgoals and junction divergence within eps.
bool stitchable(const SegmentPair& head, const TailEntry& tail, double eps,
                KlAggregate agg = KlAggregate::kSum);

// Head turns followed by tail turns: seam state replaced by the tail's first
// state, turn features reindexed, rewards rewritten to −1 per turn with a
// final −1 + r_max, outcome success, goal = the tail's source goal.
Episode concatenate(const Episode& head, const TailEntry& tail, const HerConfig& cfg);

struct StitchRecord {
  Episode episode;
  Goal subgoal;
  int head_len = 0;
  double junction_kl = 0.0;
  DialogueState head_junction;  // head's own final state, before the seam replacement
  DialogueState tail_first;
};

struct StitchStats {
  long attempted = 0;  // matches found and concatenated
  long generated = 0;  // survived validation
  long discarded = 0;  // failed validation
};

// Algorithm: segment the dialogue; if it succeeded, bank its tails in Γ and
// return nothing; if it failed, try to stitch each head with the first
// compatible tail (one per head, capped per dialogue), validating every
// stitched episode against the donor's goal before keeping it.
std::vector<StitchRecord> stitch_her(const Episode& episode, TailPool& pool,
                                     const AssessFn& assess, const HerConfig& cfg,
                                     StitchStats* stats = nullptr);

}  // namespace dher
