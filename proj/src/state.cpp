#include "dher/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dher {

DialogueState DialogueState::initial(const SlotSchema& schema, double smoothing_floor,
                                     int kb_rows) {
  DialogueState st;
  st.beliefs.resize(schema.size());
  for (SlotId s = 0; s < schema.size(); ++s) {
    const auto& spec = schema.slot(s);
    const int dim = spec.belief_dim();
    // floored point mass on "unknown" so later KL comparisons stay finite
    st.beliefs[s].assign(dim, smoothing_floor);
    st.beliefs[s][spec.unknown_id()] = 1.0 - smoothing_floor * (dim - 1);
  }
  st.kb_match_count = kb_rows;
  st.kb_total = kb_rows;
  return st;
}

ValueId DialogueState::argmax(SlotId s) const {
  const auto& b = beliefs.at(s);
  ValueId best = 0;
  for (ValueId v = 1; v < static_cast<ValueId>(b.size()); ++v)
    if (b[v] > b[best]) best = v;
  return best;
}

bool DialogueState::identified(SlotId s) const {
  auto it = stated.find(s);
  return it != stated.end() && argmax(s) == it->second;
}

std::map<SlotId, ValueId> DialogueState::identified_constraints() const {
  std::map<SlotId, ValueId> out;
  for (const auto& [s, v] : stated)
    if (argmax(s) == v) out[s] = v;
  return out;
}

int encoded_dim(const SlotSchema& schema, int max_turns) {
  return kNumActTypes + schema.size() + kNumActTypes + schema.size() + schema.belief_dim() + 1 +
         max_turns + 1;
}

std::vector<float> encode_state(const DialogueState& st, const SlotSchema& schema, int max_turns) {
  std::vector<float> x;
  x.reserve(encoded_dim(schema, max_turns));

  for (int a = 0; a < kNumActTypes; ++a)
    x.push_back(st.last_user_act && static_cast<int>(*st.last_user_act) == a ? 1.0f : 0.0f);
  for (SlotId s = 0; s < schema.size(); ++s)
    x.push_back(st.last_user_slots.count(s) ? 1.0f : 0.0f);

  for (int a = 0; a < kNumActTypes; ++a)
    x.push_back(st.last_sys_act && static_cast<int>(*st.last_sys_act) == a ? 1.0f : 0.0f);
  for (SlotId s = 0; s < schema.size(); ++s)
    x.push_back(st.last_sys_slots.count(s) ? 1.0f : 0.0f);

  for (SlotId s = 0; s < schema.size(); ++s)
    for (double p : st.beliefs[s]) x.push_back(static_cast<float>(p));

  x.push_back(static_cast<float>(st.turn) / static_cast<float>(max_turns));
  const int hot = std::min(st.turn, max_turns - 1);
  for (int t = 0; t < max_turns; ++t) x.push_back(t == hot ? 1.0f : 0.0f);

  const double denom = std::log(1.0 + std::max(st.kb_total, 1));
  x.push_back(static_cast<float>(std::log(1.0 + st.kb_match_count) / denom));
  return x;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("KL over mismatched supports");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;  // 0 * log(0/q) := 0
    if (q[i] <= 0.0) throw std::domain_error("KL undefined: p>0 where q=0");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double state_kl(const DialogueState& a, const DialogueState& b, KlAggregate agg) {
  if (a.beliefs.size() != b.beliefs.size())
    throw std::invalid_argument("states disagree on slot count");
  double acc = 0.0;
  for (std::size_t s = 0; s < a.beliefs.size(); ++s) {
    const double kl = kl_divergence(a.beliefs[s], b.beliefs[s]);
    acc = agg == KlAggregate::kSum ? acc + kl : std::max(acc, kl);
  }
  return acc;
}

}  // namespace dher
