#include "dher/kb.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace dher {

void KnowledgeBase::add_row(KbRow row) {
  if (static_cast<SlotId>(row.size()) != schema_->size())
    throw std::invalid_argument("row width does not match schema");
  for (SlotId s = 0; s < schema_->size(); ++s)
    if (row[s] < 0 || row[s] >= schema_->slot(s).num_values)
      throw std::invalid_argument("row value out of range for slot " + schema_->slot(s).name);
  const std::size_t id = rows_.size();
  if (postings_.empty()) {
    postings_.resize(schema_->size());
    for (SlotId s = 0; s < schema_->size(); ++s)
      postings_[s].resize(schema_->slot(s).num_values);
  }
  for (SlotId s = 0; s < schema_->size(); ++s) postings_[s][row[s]].push_back(id);
  rows_.push_back(std::move(row));
}

std::vector<std::size_t> KnowledgeBase::matching_rows(
    const std::map<SlotId, ValueId>& constraints) const {
  // keep only concrete bindings; dontcare/unknown restrict nothing
  std::vector<std::pair<SlotId, ValueId>> bound;
  for (const auto& [s, v] : constraints)
    if (v >= 0 && v < schema_->slot(s).num_values) bound.push_back({s, v});

  std::vector<std::size_t> out;
  if (bound.empty()) {
    out.resize(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = i;
    return out;
  }
  // intersect posting lists, starting from the shortest
  std::sort(bound.begin(), bound.end(), [&](const auto& a, const auto& b) {
    return postings_[a.first][a.second].size() < postings_[b.first][b.second].size();
  });
  out = postings_[bound[0].first][bound[0].second];
  for (std::size_t k = 1; k < bound.size() && !out.empty(); ++k) {
    const auto& list = postings_[bound[k].first][bound[k].second];
    std::vector<std::size_t> merged;
    std::set_intersection(out.begin(), out.end(), list.begin(), list.end(),
                          std::back_inserter(merged));
    out.swap(merged);
  }
  return out;
}

std::size_t KnowledgeBase::first_match(const std::map<SlotId, ValueId>& constraints) const {
  const auto rows = matching_rows(constraints);
  return rows.empty() ? npos : rows.front();
}

Goal KnowledgeBase::sample_goal(RandomStream& rng, int max_constraints) const {
  if (rows_.empty()) throw std::logic_error("cannot sample a goal from an empty table");
  const KbRow& base = rows_[rng.uniform_index(rows_.size())];

  const auto& inf = schema_->informable_slots();
  const int hi = static_cast<int>(std::min<std::size_t>(max_constraints, inf.size()));
  // single-constraint goals make booking near-trivial, so start at two
  const int lo = std::min(2, hi);
  const int want = lo + static_cast<int>(rng.uniform_index(hi - lo + 1));
  std::vector<SlotId> pool = inf;
  rng.shuffle(pool);

  Goal g;
  for (int i = 0; i < want; ++i) g.constraints[pool[i]] = base[pool[i]];
  g.requests.insert(schema_->booking_slot());
  // always at least one real question besides the booking itself
  const auto& extras = schema_->extra_requestable_slots();
  if (!extras.empty()) {
    const SlotId forced = extras[rng.uniform_index(extras.size())];
    g.requests.insert(forced);
    for (SlotId s : extras)
      if (s != forced && rng.bernoulli(0.5)) g.requests.insert(s);
  }
  return g;
}

KnowledgeBase KnowledgeBase::generate(const SlotSchema* schema, std::size_t rows,
                                      std::uint64_t seed) {
  if (rows < 1) throw std::invalid_argument("KB needs at least one row");
  KnowledgeBase kb(schema);
  RandomStream rng = RandomStream::derive(seed, /*tag=*/0x6b62u);  // "kb"
  for (std::size_t i = 0; i < rows; ++i) {
    KbRow row(schema->size());
    for (SlotId s = 0; s < schema->size(); ++s) {
      const int n = schema->slot(s).num_values;
      // early rows cycle through values so every value shows up somewhere
      row[s] = i < static_cast<std::size_t>(n) ? static_cast<ValueId>(i)
                                               : static_cast<ValueId>(rng.uniform_index(n));
    }
    kb.add_row(std::move(row));
  }
  return kb;
}

void KnowledgeBase::export_jsonl(std::ostream& os) const {
  for (const auto& row : rows_) {
    nlohmann::json j = nlohmann::json::object();
    for (SlotId s = 0; s < schema_->size(); ++s) j[schema_->slot(s).name] = row[s];
    os << j.dump() << "\n";
  }
}

KnowledgeBase KnowledgeBase::import_jsonl(const SlotSchema* schema, std::istream& is) {
  KnowledgeBase kb(schema);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    KbRow row(schema->size());
    for (SlotId s = 0; s < schema->size(); ++s) {
      const std::string& name = schema->slot(s).name;
      if (!j.contains(name)) throw std::runtime_error("row missing slot " + name);
      row[s] = j.at(name).get<ValueId>();
    }
    kb.add_row(std::move(row));
  }
  return kb;
}

}  // namespace dher
