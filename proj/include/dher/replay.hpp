#pragma once
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dher/rng.hpp"

namespace dher {

// Flat, encoded form of a transition as the learner consumes it.
struct StoredTransition {
  std::vector<float> state;
  std::vector<float> next_state;
  std::int32_t action = 0;
  float reward = 0.0f;
  bool terminal = false;
};

struct PerConfig {
  double priority_exponent = 0.6;   // sampling ∝ priority^this
  double importance_start = 0.4;    // importance exponent β, annealed ...
  double importance_end = 1.0;      // ... to this over training
  double priority_floor = 1e-3;     // keeps zero-TD-error samples alive

  void validate() const;
};

// Binary-heap-shaped cumulative sums over a power-of-two leaf array.
class SumTree {
public:
  explicit SumTree(std::size_t capacity);
  void set(std::size_t i, double v);
  double get(std::size_t i) const { return nodes_[base_ + i]; }
  double total() const { return nodes_[1]; }
  // Leaf whose cumulative-sum interval contains `mass` ∈ [0, total()).
  std::size_t find_prefix(double mass) const;
  std::size_t capacity() const { return cap_; }

private:
  std::size_t cap_;   // requested leaf count
  std::size_t base_;  // first leaf slot (power of two)
  std::vector<double> nodes_;
};

enum class SampleMode { kUniform, kPrioritized };

struct SampleBatch {
  std::vector<std::size_t> slots;    // ring positions
  std::vector<std::uint64_t> ids;    // push ids, for later priority updates
  std::vector<double> weights;       // importance weights, max-normalized
};

// Bounded transition store. Uniform or proportional-prioritized sampling;
// agnostic to where transitions came from (live dialogue or relabeling).
class ExperiencePool {
public:
  ExperiencePool(std::size_t capacity, SampleMode mode, PerConfig per = PerConfig{});

  // Stores the transition, evicting the oldest at capacity. New entries get
  // the largest priority seen so far (1.0 while empty) unless one is given.
  std::uint64_t push(StoredTransition t);
  std::uint64_t push(StoredTransition t, double raw_priority);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  SampleMode mode() const { return mode_; }
  const StoredTransition& at(std::size_t slot) const { return slots_.at(slot); }
  double priority_of(std::size_t slot) const { return raw_priority_.at(slot); }
  double tree_total() const { return tree_.total(); }

  // beta: importance exponent for this draw (ignored in uniform mode).
  // Refuses when fewer than batch_size transitions are stored.
  SampleBatch sample(std::size_t batch_size, RandomStream& rng, double beta) const;

  // priority := |td_error| + floor. Updates for evicted ids are skipped.
  void update_priorities(const std::vector<std::uint64_t>& ids,
                         const std::vector<double>& td_errors);
  long stale_updates() const { return stale_updates_; }

  // Binary snapshot (same-architecture reload).
  void save(std::ostream& os) const;
  static ExperiencePool load(std::istream& is);

private:
  std::size_t capacity_;
  SampleMode mode_;
  PerConfig per_;
  std::vector<StoredTransition> slots_;
  std::vector<std::uint64_t> slot_ids_;
  std::vector<double> raw_priority_;
  SumTree tree_;
  std::uint64_t next_id_ = 0;
  std::size_t size_ = 0;
  double max_raw_seen_ = 1.0;
  long stale_updates_ = 0;
};

}  // namespace dher
