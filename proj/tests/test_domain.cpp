#include "doctest.h"

#include <stdexcept>

#include "dher/acts.hpp"
#include "dher/goal.hpp"
#include "dher/schema.hpp"

using namespace dher;

TEST_CASE("desk schema shape") {
  const SlotSchema schema = desk_schema();
  CHECK(schema.size() == 8);
  CHECK(schema.booking_slot() == schema.find("ticket"));
  CHECK(schema.informable_slots().size() == 5);
  CHECK(schema.extra_requestable_slots().size() == 2);
  // belief dim: each slot gets its values plus dontcare plus unknown
  int d = 0;
  for (SlotId s = 0; s < schema.size(); ++s) d += schema.slot(s).num_values + 2;
  CHECK(schema.belief_dim() == d);
  CHECK_THROWS_AS(schema.find("no_such_slot"), std::out_of_range);
}

TEST_CASE("schema validation") {
  // booking slot must not be informable
  std::vector<SlotSpec> bad = {{"a", 2, true, false}, {"t", 1, true, true}};
  CHECK_THROWS_AS(SlotSchema(bad, 1), std::invalid_argument);
  // booking index in range
  std::vector<SlotSpec> ok = {{"a", 2, true, false}, {"t", 1, false, true}};
  CHECK_THROWS_AS(SlotSchema(ok, 2), std::invalid_argument);
  CHECK_NOTHROW(SlotSchema(ok, 1));
  // empty value domains rejected
  std::vector<SlotSpec> zero = {{"a", 0, true, false}, {"t", 1, false, true}};
  CHECK_THROWS_AS(SlotSchema(zero, 1), std::invalid_argument);
}

TEST_CASE("act names round-trip") {
  for (int i = 0; i < kNumActTypes; ++i) {
    const ActType t = static_cast<ActType>(i);
    const auto back = act_from_name(act_name(t));
    REQUIRE(back.has_value());
    CHECK(*back == t);
  }
  CHECK(!act_from_name("shrug").has_value());
  CHECK(kNumActTypes == 11);
}

TEST_CASE("subgoal relation") {
  const SlotSchema schema = desk_schema();
  const SlotId genre = schema.find("genre");
  const SlotId date = schema.find("date");
  const SlotId ticket = schema.booking_slot();
  const SlotId start = schema.find("start_time");

  Goal g;
  g.constraints = {{genre, 1}, {date, 2}};
  g.requests = {ticket, start};

  Goal sub;
  sub.constraints = {{genre, 1}};
  sub.requests = {ticket};
  CHECK(is_subgoal(sub, g));

  // value mismatch on a shared slot
  Goal wrong = sub;
  wrong.constraints[genre] = 0;
  CHECK(!is_subgoal(wrong, g));

  // neither the empty goal nor the full goal counts as a proper subgoal
  CHECK(!is_subgoal(Goal{}, g));
  CHECK(!is_subgoal(g, g));

  // extra request not in g
  Goal extra = sub;
  extra.requests.insert(schema.find("movie_name"));
  CHECK(is_subgoal(extra, g) == false);
}

TEST_CASE("subgoal count closed form") {
  // proper nonempty sub-pairs of (constraints, requests): 2^c * 2^r - 2
  CHECK(count_subgoals(0, 0) == 0);
  CHECK(count_subgoals(1, 0) == 0);  // only {} and the goal itself
  CHECK(count_subgoals(1, 1) == 2);
  CHECK(count_subgoals(2, 1) == 6);
  CHECK(count_subgoals(3, 2) == 30);
  CHECK_THROWS_AS(count_subgoals(-1, 2), std::invalid_argument);
}

TEST_CASE("subgoal count matches enumeration") {
  // enumerate subsets of a concrete goal with c constraints and r requests
  const SlotSchema schema = full_schema();
  for (int c = 0; c <= 4; ++c) {
    for (int r = 1; r <= 3; ++r) {
      Goal g;
      for (int i = 0; i < c; ++i) g.constraints[schema.find("c" + std::to_string(i))] = 1;
      for (int i = 0; i < r - 1; ++i) g.requests.insert(schema.find("r" + std::to_string(i)));
      g.requests.insert(schema.booking_slot());

      std::vector<SlotId> cs(g.constraints.size());
      std::vector<SlotId> rs(g.requests.begin(), g.requests.end());
      int k = 0;
      for (const auto& [s, v] : g.constraints) cs[k++] = s;

      long found = 0;
      for (int mc = 0; mc < (1 << c); ++mc) {
        for (int mr = 0; mr < (1 << r); ++mr) {
          Goal cand;
          for (int i = 0; i < c; ++i)
            if (mc & (1 << i)) cand.constraints[cs[i]] = g.constraints[cs[i]];
          for (int i = 0; i < r; ++i)
            if (mr & (1 << i)) cand.requests.insert(rs[i]);
          if (is_subgoal(cand, g)) ++found;
        }
      }
      CHECK(found == count_subgoals(c, r));
    }
  }
}

TEST_CASE("goal ordering is total and consistent") {
  const SlotSchema schema = desk_schema();
  Goal a, b;
  a.constraints = {{0, 1}};
  a.requests = {schema.booking_slot()};
  b = a;
  CHECK(a == b);
  CHECK(!(a < b));
  b.requests.insert(schema.find("start_time"));
  const bool ordered = (a < b) || (b < a);
  CHECK(ordered);
  CHECK(!(a == b));
}
