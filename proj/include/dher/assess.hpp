#pragma once
#include <functional>

#include "dher/episode.hpp"
#include "dher/kb.hpp"

namespace dher {

// Did this dialogue prefix accomplish `goal`? True iff
//   (a) every constraint was stated by the user and is the belief argmax at
//       the final turn,
//   (b) every requested slot was answered (system inform, or an accepted
//       booking) with a value some KB row consistent with the constraints
//       identified at answer time could supply,
//   (c) the system never informed a wrong value for a constraint slot, and
//   (d) the prefix's final turn contributed a new identification or answer
//       (no trailing useless turns).
// The goal may be the episode's own goal or any sub-pair of it.
bool assess_success(const Goal& goal, const Episode& prefix, const KnowledgeBase& kb);

// Assessment callback shape shared by segmentation and HER.
using AssessFn = std::function<bool(const Goal&, const Episode&)>;

// Call-counting wrapper used to check the per-turn complexity contract.
struct CountingAssessor {
  const KnowledgeBase* kb;
  mutable long calls = 0;
  bool operator()(const Goal& g, const Episode& e) const {
    ++calls;
    return assess_success(g, e, *kb);
  }
};

}  // namespace dher
