#include "dher/replay.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace dher {

void PerConfig::validate() const {
  if (priority_exponent < 0.0 || priority_exponent > 1.0 || importance_start < 0.0 ||
      importance_start > 1.0 || importance_end < 0.0 || importance_end > 1.0)
    throw std::invalid_argument("prioritization exponents must lie in [0, 1]");
  if (priority_floor <= 0.0) throw std::invalid_argument("priority floor must be positive");
}

SumTree::SumTree(std::size_t capacity) : cap_(capacity) {
  if (capacity == 0) throw std::invalid_argument("sum tree needs at least one leaf");
  base_ = 1;
  while (base_ < capacity) base_ <<= 1;
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t i, double v) {
  std::size_t n = base_ + i;
  nodes_[n] = v;
  for (n >>= 1; n >= 1; n >>= 1) nodes_[n] = nodes_[2 * n] + nodes_[2 * n + 1];
}

std::size_t SumTree::find_prefix(double mass) const {
  std::size_t n = 1;
  while (n < base_) {
    const double left = nodes_[2 * n];
    if (mass < left) {
      n = 2 * n;
    } else {
      mass -= left;
      n = 2 * n + 1;
    }
  }
  return std::min(n - base_, cap_ - 1);
}

ExperiencePool::ExperiencePool(std::size_t capacity, SampleMode mode, PerConfig per)
    : capacity_(capacity), mode_(mode), per_(per), tree_(capacity == 0 ? 1 : capacity) {
  if (capacity_ == 0) throw std::invalid_argument("pool capacity must be positive");
  per_.validate();
  slots_.resize(capacity_);
  slot_ids_.assign(capacity_, UINT64_MAX);
  raw_priority_.assign(capacity_, 0.0);
}

std::uint64_t ExperiencePool::push(StoredTransition t) {
  return push(std::move(t), size_ == 0 ? 1.0 : max_raw_seen_);
}

std::uint64_t ExperiencePool::push(StoredTransition t, double raw_priority) {
  const std::uint64_t id = next_id_++;
  const std::size_t slot = static_cast<std::size_t>(id % capacity_);
  slots_[slot] = std::move(t);
  slot_ids_[slot] = id;
  raw_priority_[slot] = raw_priority;
  max_raw_seen_ = std::max(max_raw_seen_, raw_priority);
  if (mode_ == SampleMode::kPrioritized)
    tree_.set(slot, std::pow(raw_priority, per_.priority_exponent));
  if (size_ < capacity_) ++size_;
  return id;
}

SampleBatch ExperiencePool::sample(std::size_t batch_size, RandomStream& rng, double beta) const {
  if (size_ < batch_size) throw std::logic_error("pool holds fewer transitions than a batch");
  SampleBatch b;
  b.slots.reserve(batch_size);
  b.ids.reserve(batch_size);
  b.weights.assign(batch_size, 1.0);

  if (mode_ == SampleMode::kUniform) {
    for (std::size_t k = 0; k < batch_size; ++k) {
      const std::size_t slot = rng.uniform_index(size_);
      b.slots.push_back(slot);
      b.ids.push_back(slot_ids_[slot]);
    }
    return b;
  }

  const double total = tree_.total();
  if (!(total > 0.0)) throw std::logic_error("prioritized pool has zero total priority");
  double wmax = 0.0;
  for (std::size_t k = 0; k < batch_size; ++k) {
    // clamp guards the rounding case where the walk drifts past the last
    // filled slot (anything beyond size_ has zero priority)
    const std::size_t slot = std::min(tree_.find_prefix(rng.uniform() * total), size_ - 1);
    b.slots.push_back(slot);
    b.ids.push_back(slot_ids_[slot]);
    const double p = tree_.get(slot) / total;
    b.weights[k] = std::pow(static_cast<double>(size_) * p, -beta);
    wmax = std::max(wmax, b.weights[k]);
  }
  for (double& w : b.weights) w /= wmax;
  return b;
}

void ExperiencePool::update_priorities(const std::vector<std::uint64_t>& ids,
                                       const std::vector<double>& td_errors) {
  if (ids.size() != td_errors.size())
    throw std::invalid_argument("priority update arity mismatch");
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const std::uint64_t id = ids[k];
    const std::size_t slot = static_cast<std::size_t>(id % capacity_);
    if (slot_ids_[slot] != id) {  // evicted since it was sampled
      ++stale_updates_;
      continue;
    }
    const double raw = std::abs(td_errors[k]) + per_.priority_floor;
    raw_priority_[slot] = raw;
    max_raw_seen_ = std::max(max_raw_seen_, raw);
    if (mode_ == SampleMode::kPrioritized)
      tree_.set(slot, std::pow(raw, per_.priority_exponent));
  }
}

namespace {

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("truncated pool snapshot");
  return v;
}

void put_vec(std::ostream& os, const std::vector<float>& v) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> take_vec(std::istream& is) {
  const auto n = take<std::uint32_t>(is);
  std::vector<float> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!is) throw std::runtime_error("truncated pool snapshot");
  return v;
}

constexpr char kPoolMagic[8] = {'D', 'H', 'P', 'O', 'O', 'L', '0', '1'};

}  // namespace

void ExperiencePool::save(std::ostream& os) const {
  os.write(kPoolMagic, sizeof(kPoolMagic));
  put<std::uint64_t>(os, capacity_);
  put<std::uint8_t>(os, mode_ == SampleMode::kPrioritized ? 1 : 0);
  put(os, per_.priority_exponent);
  put(os, per_.importance_start);
  put(os, per_.importance_end);
  put(os, per_.priority_floor);
  put<std::uint64_t>(os, next_id_);
  put<std::uint64_t>(os, size_);
  put(os, max_raw_seen_);
  put<std::int64_t>(os, stale_updates_);
  for (std::size_t slot = 0; slot < size_; ++slot) {
    put<std::uint64_t>(os, slot_ids_[slot]);
    put(os, raw_priority_[slot]);
    const StoredTransition& t = slots_[slot];
    put_vec(os, t.state);
    put_vec(os, t.next_state);
    put<std::int32_t>(os, t.action);
    put(os, t.reward);
    put<std::uint8_t>(os, t.terminal ? 1 : 0);
  }
}

ExperiencePool ExperiencePool::load(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kPoolMagic))
    throw std::runtime_error("not a pool snapshot");
  const auto capacity = take<std::uint64_t>(is);
  const auto mode = take<std::uint8_t>(is) ? SampleMode::kPrioritized : SampleMode::kUniform;
  PerConfig per;
  per.priority_exponent = take<double>(is);
  per.importance_start = take<double>(is);
  per.importance_end = take<double>(is);
  per.priority_floor = take<double>(is);
  ExperiencePool pool(capacity, mode, per);
  pool.next_id_ = take<std::uint64_t>(is);
  pool.size_ = take<std::uint64_t>(is);
  pool.max_raw_seen_ = take<double>(is);
  pool.stale_updates_ = take<std::int64_t>(is);
  for (std::size_t slot = 0; slot < pool.size_; ++slot) {
    pool.slot_ids_[slot] = take<std::uint64_t>(is);
    pool.raw_priority_[slot] = take<double>(is);
    StoredTransition t;
    t.state = take_vec(is);
    t.next_state = take_vec(is);
    t.action = take<std::int32_t>(is);
    t.reward = take<float>(is);
    t.terminal = take<std::uint8_t>(is) != 0;
    pool.slots_[slot] = std::move(t);
    if (mode == SampleMode::kPrioritized)
      pool.tree_.set(slot, std::pow(pool.raw_priority_[slot], per.priority_exponent));
  }
  return pool;
}

}  // namespace dher
