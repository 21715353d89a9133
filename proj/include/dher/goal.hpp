#pragma once
#include <cstdint>
#include <map>
#include <set>

#include "dher/schema.hpp"

namespace dher {

// User goal: hard constraints (slot -> required value) plus the set of
// slots whose values the user wants back.
struct Goal {
  std::map<SlotId, ValueId> constraints;
  std::set<SlotId> requests;

  bool empty() const { return constraints.empty() && requests.empty(); }
  int size() const { return static_cast<int>(constraints.size() + requests.size()); }

  bool operator==(const Goal& o) const {
    return constraints == o.constraints && requests == o.requests;
  }
  bool operator<(const Goal& o) const {
    if (constraints != o.constraints) return constraints < o.constraints;
    return requests < o.requests;
  }
};

// True when `sub` is a non-empty component-wise subset of `g` (values must
// agree on shared constraint slots) and differs from `g` itself.
bool is_subgoal(const Goal& sub, const Goal& g);

// Number of distinct proper non-empty subgoals of a goal with c constraints
// and r requests: 2^c * 2^r - 2 (drop the empty pair and the goal itself).
// The empty goal has none.
std::uint64_t count_subgoals(int c, int r);

}  // namespace dher
