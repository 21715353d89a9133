#pragma once
#include <vector>

#include "dher/assess.hpp"
#include "dher/episode.hpp"

namespace dher {

// A valid head segment (prefix from turn 0) plus the largest subgoal it
// accomplishes. The final pair of a successful dialogue carries the full
// goal; downstream consumers drop it where a proper subgoal is required.
struct SegmentPair {
  Episode segment;
  Goal subgoal;
};

struct SegmentationResult {
  std::vector<SegmentPair> pairs;  // ordered by segment length
  long assessor_calls = 0;
  int max_calls_per_turn = 0;
};

// Incremental segmentation: walk the dialogue once, keeping a ledger of
// identified components P and remaining components Q. After each turn, test
// P ∪ {q} against the prefix for every q still in Q; movers join P, and any
// movement emits the prefix paired with a copy of P. Per-turn assessment
// calls are bounded by |Q| ≤ |C| + |R|.
SegmentationResult segment_dialogue(const Episode& episode, const AssessFn& assess);

// Exhaustive reference: at every prefix, test all nonempty sub-pairs of the
// goal and emit whenever the maximal accomplished sub-pair grows. Only for
// testing; refuses goals bigger than `guard` components.
SegmentationResult segment_dialogue_bruteforce(const Episode& episode, const AssessFn& assess,
                                               int guard = 12);

}  // namespace dher
