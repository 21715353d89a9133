#pragma once
#include <iosfwd>
#include <vector>

#include "dher/env.hpp"
#include "dher/replay.hpp"

namespace dher {

// Two-layer value network: input -> rectified hidden (width 80) -> one
// output per system act. Parameters live in one flat vector, laid out as
// W1 (hidden x in, row-major), b1, W2 (out x hidden), b2.
class QNetwork {
public:
  QNetwork() = default;
  static QNetwork init(int in, int hidden, int out, RandomStream& rng);

  int in() const { return in_; }
  int hidden() const { return hidden_; }
  int out() const { return out_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::vector<double> forward(const std::vector<float>& x) const;

  struct Cache {
    std::vector<float> x;
    std::vector<double> h;  // post-rectifier hidden activations
    std::vector<double> q;
  };
  std::vector<double> forward(const std::vector<float>& x, Cache& cache) const;
  // Accumulates d(loss)/d(params) into grad given d(loss)/d(q outputs).
  void backward(const Cache& cache, const std::vector<double>& dq,
                std::vector<double>& grad) const;

  void save(std::ostream& os) const;
  static QNetwork load(std::istream& is);

private:
  int in_ = 0, hidden_ = 0, out_ = 0;
  std::vector<double> params_;
};

struct TrainConfig {
  double gamma = 0.9;
  double learning_rate = 1e-3;
  // Rewards enter the TD loss in units of the success bonus; the raw ±80
  // swings otherwise keep the gradient clip saturated and the net churning.
  double reward_scale = 1.0 / 80.0;
  int batch_size = 16;
  double epsilon_start = 0.3;
  double epsilon_end = 0.01;
  int hidden = 80;
  double grad_clip = 10.0;
  int target_sync_period = 1;  // epochs between target refreshes

  void validate() const;
};

// Bootstrapped target: r for terminal transitions, else r + gamma * max
// target-net value at the next state.
double td_target(const StoredTransition& t, const QNetwork& target, double gamma,
                 double reward_scale = 1.0);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;
  std::vector<double> td_errors;  // per item: Q(s,a) - y
};
// Importance-weighted mean squared TD error; gradient flows through Q(s,a)
// only. Throws on empty batches or non-finite loss.
LossResult loss_and_gradient(const QNetwork& net, const std::vector<const StoredTransition*>& batch,
                             const std::vector<double>& targets,
                             const std::vector<double>& weights);

int greedy_action(const QNetwork& net, const std::vector<float>& x);  // ties -> lowest index
int act_epsilon_greedy(const QNetwork& net, const std::vector<float>& x, double epsilon,
                       RandomStream& rng);

// Plain SGD with a global gradient-norm clip.
void sgd_step(QNetwork& net, const std::vector<double>& grad, double lr, double clip_norm);

void sync_target(QNetwork& target, const QNetwork& net);  // exact copy; shapes must match

// Exploration rate: linear from epsilon_start to epsilon_end over the first
// half of training, then flat.
double epsilon_at(int epoch, int total_epochs, const TrainConfig& cfg);

struct WarmStartResult {
  int episodes = 0;
  int successes = 0;
  std::size_t pairs = 0;
  double holdout_accuracy = 0.0;
  int epochs_run = 0;
  double greedy_success = 0.0;     // cloned net, greedy, fresh episodes on the same env
  std::vector<Episode> collected;  // demonstration dialogues, for replay seeding
};

// Roll the hand-coded rule policy, then clone it with cross-entropy until
// held-out action accuracy reaches `target_accuracy` or the epoch cap.
// n_episodes = 0 leaves the network untouched (cold start). Throws when the
// rule policy cannot complete a single dialogue.
WarmStartResult warm_start(QNetwork& net, Environment& env, int n_episodes, RandomStream& rng,
                           double target_accuracy = 0.8, int epoch_cap = 400);

}  // namespace dher
