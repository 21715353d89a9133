#include "dher/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace dher {

void TrainConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma outside [0, 1]");
  if (learning_rate <= 0.0 || batch_size < 1 || hidden < 1 || target_sync_period < 1)
    throw std::invalid_argument("training hyperparameters out of range");
  if (reward_scale <= 0.0) throw std::invalid_argument("reward_scale must be positive");
  if (epsilon_end > epsilon_start || epsilon_start > 1.0 || epsilon_end < 0.0)
    throw std::invalid_argument("need 0 <= epsilon_end <= epsilon_start <= 1");
}

QNetwork QNetwork::init(int in, int hidden, int out, RandomStream& rng) {
  if (in < 1 || hidden < 1 || out < 1) throw std::invalid_argument("bad network shape");
  QNetwork net;
  net.in_ = in;
  net.hidden_ = hidden;
  net.out_ = out;
  net.params_.resize(static_cast<std::size_t>(hidden) * in + hidden +
                     static_cast<std::size_t>(out) * hidden + out);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::size_t k = 0;
  for (int j = 0; j < hidden * in; ++j) net.params_[k++] = rng.uniform(-s1, s1);
  for (int j = 0; j < hidden; ++j) net.params_[k++] = 0.0;
  for (int j = 0; j < out * hidden; ++j) net.params_[k++] = rng.uniform(-s2, s2);
  for (int j = 0; j < out; ++j) net.params_[k++] = 0.0;
  return net;
}

std::vector<double> QNetwork::forward(const std::vector<float>& x) const {
  Cache c;
  return forward(x, c);
}

std::vector<double> QNetwork::forward(const std::vector<float>& x, Cache& cache) const {
  if (static_cast<int>(x.size()) != in_)
    throw std::invalid_argument("state encoding length does not match the network input");
  const double* w1 = params_.data();
  const double* b1 = w1 + static_cast<std::size_t>(hidden_) * in_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + static_cast<std::size_t>(out_) * hidden_;

  cache.x = x;
  cache.h.assign(hidden_, 0.0);
  for (int j = 0; j < hidden_; ++j) {
    const double* row = w1 + static_cast<std::size_t>(j) * in_;
    // unrolled accumulators: this loop dominates training time
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    int i = 0;
    for (; i + 4 <= in_; i += 4) {
      a0 += row[i] * x[i];
      a1 += row[i + 1] * x[i + 1];
      a2 += row[i + 2] * x[i + 2];
      a3 += row[i + 3] * x[i + 3];
    }
    double a = a0 + a1 + a2 + a3 + b1[j];
    for (; i < in_; ++i) a += row[i] * x[i];
    cache.h[j] = a > 0.0 ? a : 0.0;
  }
  cache.q.assign(out_, 0.0);
  for (int o = 0; o < out_; ++o) {
    const double* row = w2 + static_cast<std::size_t>(o) * hidden_;
    double a = b2[o];
    for (int j = 0; j < hidden_; ++j) a += row[j] * cache.h[j];
    cache.q[o] = a;
  }
  return cache.q;
}

void QNetwork::backward(const Cache& cache, const std::vector<double>& dq,
                        std::vector<double>& grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer shape mismatch");
  const std::size_t w1n = static_cast<std::size_t>(hidden_) * in_;
  const double* w2 = params_.data() + w1n + hidden_;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + w1n;
  double* g_w2 = g_b1 + hidden_;
  double* g_b2 = g_w2 + static_cast<std::size_t>(out_) * hidden_;

  std::vector<double> dh(hidden_, 0.0);
  for (int o = 0; o < out_; ++o) {
    const double d = dq[o];
    if (d == 0.0) continue;
    double* grow = g_w2 + static_cast<std::size_t>(o) * hidden_;
    const double* wrow = w2 + static_cast<std::size_t>(o) * hidden_;
    for (int j = 0; j < hidden_; ++j) {
      grow[j] += d * cache.h[j];
      dh[j] += d * wrow[j];
    }
    g_b2[o] += d;
  }
  for (int j = 0; j < hidden_; ++j) {
    if (cache.h[j] <= 0.0 || dh[j] == 0.0) continue;  // rectifier gate
    const double d = dh[j];
    double* grow = g_w1 + static_cast<std::size_t>(j) * in_;
    for (int i = 0; i < in_; ++i) grow[i] += d * cache.x[i];
    g_b1[j] += d;
  }
}

double td_target(const StoredTransition& t, const QNetwork& target, double gamma,
                 double reward_scale) {
  if (t.terminal) return reward_scale * t.reward;
  const std::vector<double> q = target.forward(t.next_state);
  return reward_scale * t.reward + gamma * *std::max_element(q.begin(), q.end());
}

LossResult loss_and_gradient(const QNetwork& net, const std::vector<const StoredTransition*>& batch,
                             const std::vector<double>& targets,
                             const std::vector<double>& weights) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (batch.size() != targets.size() || batch.size() != weights.size())
    throw std::invalid_argument("batch/target/weight arity mismatch");

  LossResult res;
  res.grad.assign(net.param_count(), 0.0);
  res.td_errors.resize(batch.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  QNetwork::Cache cache;
  std::vector<double> dq(net.out(), 0.0);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const StoredTransition& t = *batch[k];
    const std::vector<double>& q = net.forward(t.state, cache);
    const double delta = q[t.action] - targets[k];
    res.td_errors[k] = delta;
    res.loss += weights[k] * delta * delta * inv_n;
    std::fill(dq.begin(), dq.end(), 0.0);
    dq[t.action] = 2.0 * weights[k] * delta * inv_n;
    net.backward(cache, dq, res.grad);
  }
  if (!std::isfinite(res.loss))
    throw std::runtime_error("training diverged: non-finite loss over the batch");
  return res;
}

int greedy_action(const QNetwork& net, const std::vector<float>& x) {
  const std::vector<double> q = net.forward(x);
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.size()); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

int act_epsilon_greedy(const QNetwork& net, const std::vector<float>& x, double epsilon,
                       RandomStream& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon outside [0, 1]");
  if (rng.bernoulli(epsilon)) return static_cast<int>(rng.uniform_index(net.out()));
  return greedy_action(net, x);
}

void sgd_step(QNetwork& net, const std::vector<double>& grad, double lr, double clip_norm) {
  if (grad.size() != net.param_count()) throw std::invalid_argument("gradient shape mismatch");
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;
  auto& p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * scale * grad[i];
}

void sync_target(QNetwork& target, const QNetwork& net) {
  if (target.in() != net.in() || target.hidden() != net.hidden() || target.out() != net.out())
    throw std::invalid_argument("target network shape mismatch");
  target.params() = net.params();
}

double epsilon_at(int epoch, int total_epochs, const TrainConfig& cfg) {
  const int half = std::max(1, total_epochs / 2);
  const double t = std::min(epoch, half) / static_cast<double>(half);
  return cfg.epsilon_start + t * (cfg.epsilon_end - cfg.epsilon_start);
}

namespace {

// Softmax cross-entropy pieces for cloning; returns d(loss)/d(logits).
double ce_loss_and_dq(const std::vector<double>& q, int label, std::vector<double>& dq) {
  const double qmax = *std::max_element(q.begin(), q.end());
  double z = 0.0;
  for (double v : q) z += std::exp(v - qmax);
  for (std::size_t a = 0; a < q.size(); ++a) dq[a] = std::exp(q[a] - qmax) / z;
  const double loss = -std::log(std::max(dq[label], 1e-12));
  dq[label] -= 1.0;
  return loss;
}

}  // namespace

WarmStartResult warm_start(QNetwork& net, Environment& env, int n_episodes, RandomStream& rng,
                           double target_accuracy, int epoch_cap) {
  WarmStartResult res;
  if (n_episodes == 0) return res;
  if (n_episodes < 0) throw std::invalid_argument("negative warm-start episode count");

  const SlotSchema& schema = env.schema();
  const int max_turns = env.config().max_turns;
  std::vector<std::pair<std::vector<float>, int>> data;
  for (int e = 0; e < n_episodes; ++e) {
    env.reset();
    while (!env.done()) {
      const int a = rule_policy_action(env.state(), schema);
      data.push_back({encode_state(env.state(), schema, max_turns), a});
      env.step(a);
    }
    ++res.episodes;
    if (env.episode().outcome == DialogueOutcome::kSuccess) ++res.successes;
    res.collected.push_back(env.episode());
  }
  if (res.successes == 0)
    throw std::runtime_error("rule policy never completed a dialogue; check the environment");
  res.pairs = data.size();

  rng.shuffle(data);
  const std::size_t holdout = std::max<std::size_t>(1, data.size() / 5);
  const std::size_t train_n = data.size() - holdout;

  // cloning wants larger steps than TD training; fixed here, not configured
  const double clone_lr = 0.08;
  std::vector<double> grad(net.param_count());
  std::vector<double> dq(net.out());
  QNetwork::Cache cache;
  std::vector<std::size_t> order(train_n);
  for (std::size_t i = 0; i < train_n; ++i) order[i] = i;

  auto holdout_accuracy = [&]() {
    std::size_t hits = 0;
    for (std::size_t i = train_n; i < data.size(); ++i)
      if (greedy_action(net, data[i].first) == data[i].second) ++hits;
    return static_cast<double>(hits) / static_cast<double>(holdout);
  };

  for (int epoch = 0; epoch < epoch_cap; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i = 0; i < train_n; ++i) {
      const auto& [x, label] = data[order[i]];
      net.forward(x, cache);
      ce_loss_and_dq(cache.q, label, dq);
      std::fill(grad.begin(), grad.end(), 0.0);
      net.backward(cache, dq, grad);
      sgd_step(net, grad, clone_lr, 10.0);
    }
    res.epochs_run = epoch + 1;
    res.holdout_accuracy = holdout_accuracy();
    if (res.holdout_accuracy >= target_accuracy) break;
  }

  // How good is the clone on its own? Useful as a sanity floor before any
  // value learning happens.
  const int probe = 40;
  int wins = 0;
  for (int e = 0; e < probe; ++e) {
    env.reset();
    while (!env.done())
      env.step(greedy_action(net, encode_state(env.state(), schema, max_turns)));
    if (env.episode().outcome == DialogueOutcome::kSuccess) ++wins;
  }
  res.greedy_success = static_cast<double>(wins) / probe;
  return res;
}

namespace {
constexpr char kNetMagic[] = "DHERNET1";
}

void QNetwork::save(std::ostream& os) const {
  os << kNetMagic << "\n" << in_ << " " << hidden_ << " " << out_ << "\n";
  char buf[32];
  for (std::size_t i = 0; i < params_.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", params_[i]);
    os << buf << (i + 1 == params_.size() ? "\n" : " ");
  }
}

QNetwork QNetwork::load(std::istream& is) {
  std::string magic;
  is >> magic;
  if (magic != kNetMagic) throw std::runtime_error("not a saved network");
  int in = 0, hidden = 0, out = 0;
  is >> in >> hidden >> out;
  if (!is || in < 1 || hidden < 1 || out < 1) throw std::runtime_error("corrupt network header");
  QNetwork net;
  net.in_ = in;
  net.hidden_ = hidden;
  net.out_ = out;
  net.params_.resize(static_cast<std::size_t>(hidden) * in + hidden +
                     static_cast<std::size_t>(out) * hidden + out);
  for (double& p : net.params_) {
    is >> p;
    if (!is) throw std::runtime_error("truncated network parameters");
  }
  return net;
}

}  // namespace dher
