#include "dher/segmentation.hpp"

#include <algorithm>
#include <stdexcept>

namespace dher {

namespace {

struct Component {
  bool request = false;
  SlotId slot = 0;
  ValueId value = 0;  // meaningless for requests
};

std::vector<Component> goal_components(const Goal& g) {
  std::vector<Component> items;
  for (const auto& [s, v] : g.constraints) items.push_back({false, s, v});
  for (SlotId s : g.requests) items.push_back({true, s, 0});
  return items;
}

Goal goal_from(const std::vector<Component>& items, const std::vector<int>& picks) {
  Goal g;
  for (int i : picks) {
    const Component& c = items[i];
    if (c.request) g.requests.insert(c.slot);
    else g.constraints[c.slot] = c.value;
  }
  return g;
}

}  // namespace

SegmentationResult segment_dialogue(const Episode& episode, const AssessFn& assess) {
  if (episode.goal.empty()) throw std::invalid_argument("cannot segment against an empty goal");
  if (episode.turns.empty()) throw std::invalid_argument("cannot segment an empty dialogue");

  const std::vector<Component> items = goal_components(episode.goal);
  std::vector<int> p;                    // identified components
  std::vector<int> q(items.size());      // still outstanding
  for (std::size_t i = 0; i < items.size(); ++i) q[i] = static_cast<int>(i);

  SegmentationResult res;
  Episode prefix;
  prefix.goal = episode.goal;
  prefix.outcome = DialogueOutcome::kOngoing;

  for (const Transition& turn : episode.turns) {
    prefix.turns.push_back(turn);
    std::vector<int> moved;
    int calls_this_turn = 0;
    for (int cand : q) {
      std::vector<int> trial = p;
      trial.push_back(cand);
      ++calls_this_turn;
      if (assess(goal_from(items, trial), prefix)) moved.push_back(cand);
    }
    res.assessor_calls += calls_this_turn;
    res.max_calls_per_turn = std::max(res.max_calls_per_turn, calls_this_turn);
    if (!moved.empty()) {
      for (int m : moved) {
        p.push_back(m);
        q.erase(std::find(q.begin(), q.end(), m));
      }
      res.pairs.push_back(SegmentPair{prefix, goal_from(items, p)});
    }
  }
  return res;
}

SegmentationResult segment_dialogue_bruteforce(const Episode& episode, const AssessFn& assess,
                                               int guard) {
  if (episode.goal.empty()) throw std::invalid_argument("cannot segment against an empty goal");
  if (episode.turns.empty()) throw std::invalid_argument("cannot segment an empty dialogue");

  const std::vector<Component> items = goal_components(episode.goal);
  const int n = static_cast<int>(items.size());
  if (n > guard) throw std::invalid_argument("goal too large for exhaustive segmentation");

  SegmentationResult res;
  Episode prefix;
  prefix.goal = episode.goal;
  prefix.outcome = DialogueOutcome::kOngoing;
  int best_size = 0;

  for (const Transition& turn : episode.turns) {
    prefix.turns.push_back(turn);
    int top_size = 0;
    std::uint32_t top_mask = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::vector<int> picks;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) picks.push_back(i);
      ++res.assessor_calls;
      if (assess(goal_from(items, picks), prefix) &&
          static_cast<int>(picks.size()) > top_size) {
        top_size = static_cast<int>(picks.size());
        top_mask = mask;
      }
    }
    if (top_size > best_size) {
      best_size = top_size;
      std::vector<int> picks;
      for (int i = 0; i < n; ++i)
        if (top_mask & (1u << i)) picks.push_back(i);
      res.pairs.push_back(SegmentPair{prefix, goal_from(items, picks)});
    }
  }
  return res;
}

}  // namespace dher
