#include "dher/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "dher/assess.hpp"

namespace dher {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kEr: return "ER";
    case Strategy::kPer: return "PER";
    case Strategy::kTHer: return "T-HER";
    case Strategy::kSHer: return "S-HER";
    case Strategy::kTHerPer: return "T-HER+PER";
    case Strategy::kSHerPer: return "S-HER+PER";
    case Strategy::kTsHer: return "T+S-HER";
    case Strategy::kTsHerPer: return "T+S-HER+PER";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(Strategy::kTsHerPer); ++i) {
    const Strategy s = static_cast<Strategy>(i);
    if (name == strategy_name(s)) return s;
  }
  return std::nullopt;
}

bool strategy_uses_per(Strategy s) {
  return s == Strategy::kPer || s == Strategy::kTHerPer || s == Strategy::kSHerPer ||
         s == Strategy::kTsHerPer;
}

bool strategy_uses_trim(Strategy s) {
  return s == Strategy::kTHer || s == Strategy::kTHerPer || s == Strategy::kTsHer ||
         s == Strategy::kTsHerPer;
}

bool strategy_uses_stitch(Strategy s) {
  return s == Strategy::kSHer || s == Strategy::kSHerPer || s == Strategy::kTsHer ||
         s == Strategy::kTsHerPer;
}

void ExperimentConfig::validate(const SlotSchema& schema) const {
  if (epochs < 1 || episodes_per_epoch < 1 || n_runs < 1 || eval_episodes < 0)
    throw std::invalid_argument("experiment sizing out of range");
  if (kb_rows < 1) throw std::invalid_argument("kb_rows must be positive");
  env.validate(schema);
  // largest goal: every informable constraint plus every requestable slot
  const int max_goal = std::min<int>(env.goal_max_constraints,
                                     static_cast<int>(schema.informable_slots().size())) +
                       1 + static_cast<int>(schema.extra_requestable_slots().size());
  her.validate(max_goal);
  if (her.max_turns != env.max_turns)
    throw std::invalid_argument("her.max_turns must equal env.max_turns");
  if (std::abs(her.r_max - env.success_bonus) > 1e-9)
    throw std::invalid_argument("her.r_max must equal env.success_bonus");
  train.validate();
  per.validate();
  if (pool_capacity < static_cast<std::size_t>(train.batch_size))
    throw std::invalid_argument("pool smaller than one batch");
}

namespace {

StoredTransition to_stored(const Transition& t, const SlotSchema& schema, int max_turns) {
  StoredTransition st;
  st.state = encode_state(t.state, schema, max_turns);
  st.next_state = encode_state(t.next_state, schema, max_turns);
  st.action = t.action;
  st.reward = static_cast<float>(t.reward);
  st.terminal = t.terminal;
  return st;
}

double evaluate_greedy(const QNetwork& net, Environment& env, int episodes,
                       const SlotSchema& schema, int max_turns) {
  if (episodes == 0) return 0.0;
  int wins = 0;
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    while (!env.done())
      env.step(greedy_action(net, encode_state(env.state(), schema, max_turns)));
    if (env.episode().outcome == DialogueOutcome::kSuccess) ++wins;
  }
  return static_cast<double>(wins) / episodes;
}

}  // namespace

RunResult run_single(const SlotSchema& schema, const KnowledgeBase& kb,
                     const ExperimentConfig& cfg, int run_index, RunArtifacts* artifacts) {
  cfg.validate(schema);
  const std::uint64_t run_seed = splitmix64(cfg.base_seed ^ splitmix64(0x52554eull + run_index));
  const int max_turns = cfg.env.max_turns;

  Environment env(&schema, &kb, cfg.env, run_seed);
  Environment eval_env(&schema, &kb, cfg.env, splitmix64(run_seed ^ 0x6576616cull));
  RandomStream pol_rng = RandomStream::derive(run_seed, 0x706f6cull);
  RandomStream pool_rng = RandomStream::derive(run_seed, 0x706f6f6cull);
  RandomStream init_rng = RandomStream::derive(run_seed, 0x696e6974ull);
  RandomStream warm_rng = RandomStream::derive(run_seed, 0x7761726dull);

  QNetwork net = QNetwork::init(encoded_dim(schema, max_turns), cfg.train.hidden, kNumActTypes,
                                init_rng);
  QNetwork target = net;
  ExperiencePool pool(cfg.pool_capacity,
                      strategy_uses_per(cfg.strategy) ? SampleMode::kPrioritized
                                                      : SampleMode::kUniform,
                      cfg.per);
  TailPool tails(cfg.her.tail_pool_capacity);
  const AssessFn assess = [&kb](const Goal& g, const Episode& e) {
    return assess_success(g, e, kb);
  };

  StitchStats sstats;
  long gen_ther = 0;

  // Feed one finished dialogue through the replay machinery: store its real
  // turns, then let the relabelers mine it. Successes donate tails, failures
  // get trimmed.
  const auto ingest = [&](const Episode& episode) {
    for (const Transition& t : episode.turns) pool.push(to_stored(t, schema, max_turns));
    if (strategy_uses_trim(cfg.strategy) && episode.outcome == DialogueOutcome::kFailure) {
      for (const Episode& gen : trim_her(episode, assess, cfg.her)) {
        for (const Transition& t : gen.turns) pool.push(to_stored(t, schema, max_turns));
        ++gen_ther;
      }
    }
    if (strategy_uses_stitch(cfg.strategy)) {
      for (const StitchRecord& rec : stitch_her(episode, tails, assess, cfg.her, &sstats))
        for (const Transition& t : rec.episode.turns)
          pool.push(to_stored(t, schema, max_turns));
    }
  };

  RunResult res;
  if (cfg.warm_start_episodes > 0) {
    Environment warm_env(&schema, &kb, cfg.env, splitmix64(run_seed ^ 0x7761726dull) + 1);
    res.warm = warm_start(net, warm_env, cfg.warm_start_episodes, warm_rng,
                          cfg.warm_target_accuracy);
    // The demonstrations are ordinary dialogues: replayable, minable.
    for (const Episode& episode : res.warm.collected) ingest(episode);
    res.warm.collected.clear();
  }
  sync_target(target, net);

  std::vector<const StoredTransition*> batch_ptrs(cfg.train.batch_size);
  std::vector<double> targets(cfg.train.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double eps = epsilon_at(epoch, cfg.epochs, cfg.train);
    const double frac = cfg.epochs <= 1 ? 1.0 : static_cast<double>(epoch) / (cfg.epochs - 1);
    const double beta =
        cfg.per.importance_start + frac * (cfg.per.importance_end - cfg.per.importance_start);

    int wins = 0;
    double reward_sum = 0.0;
    long turn_sum = 0;
    for (int ep = 0; ep < cfg.episodes_per_epoch; ++ep) {
      env.reset();
      while (!env.done()) {
        const std::vector<float> x = encode_state(env.state(), schema, max_turns);
        env.step(act_epsilon_greedy(net, x, eps, pol_rng));
      }
      const Episode episode = env.take_episode();
      if (episode.outcome == DialogueOutcome::kSuccess) ++wins;
      reward_sum += episode.total_reward();
      turn_sum += episode.length();
      ingest(episode);

      // one gradient step per real dialogue turn
      for (int k = 0; k < episode.length(); ++k) {
        if (pool.size() < static_cast<std::size_t>(cfg.train.batch_size)) break;
        const SampleBatch batch = pool.sample(cfg.train.batch_size, pool_rng, beta);
        for (int b = 0; b < cfg.train.batch_size; ++b) {
          batch_ptrs[b] = &pool.at(batch.slots[b]);
          targets[b] = td_target(*batch_ptrs[b], target, cfg.train.gamma, cfg.train.reward_scale);
        }
        LossResult lr = loss_and_gradient(net, batch_ptrs, targets, batch.weights);
        sgd_step(net, lr.grad, cfg.train.learning_rate, cfg.train.grad_clip);
        if (pool.mode() == SampleMode::kPrioritized)
          pool.update_priorities(batch.ids, lr.td_errors);
      }
    }

    if ((epoch + 1) % cfg.train.target_sync_period == 0) sync_target(target, net);

    MetricsRow row;
    row.run = run_index;
    row.epoch = epoch;
    row.success_rate = static_cast<double>(wins) / cfg.episodes_per_epoch;
    row.eval_success_rate = evaluate_greedy(net, eval_env, cfg.eval_episodes, schema, max_turns);
    row.mean_reward = reward_sum / cfg.episodes_per_epoch;
    row.mean_turns = static_cast<double>(turn_sum) / cfg.episodes_per_epoch;
    row.pool_size = pool.size();
    row.generated_ther = gen_ther;
    row.generated_sher = sstats.generated;
    row.discarded_stitches = sstats.discarded;
    row.epsilon = eps;
    res.rows.push_back(row);
  }
  res.attempted_stitches = sstats.attempted;
  if (artifacts) {
    artifacts->net = std::move(net);
    artifacts->pool.emplace(std::move(pool));
  }
  return res;
}

ExperimentResult run_experiment(const SlotSchema& schema, const KnowledgeBase& kb,
                                const ExperimentConfig& cfg) {
  ExperimentResult out;
  for (int run = 0; run < cfg.n_runs; ++run) {
    out.runs.push_back(run_single(schema, kb, cfg, run));
    for (const MetricsRow& row : out.runs.back().rows) out.rows.push_back(row);
  }
  return out;
}

std::optional<int> epochs_to_threshold(const std::vector<MetricsRow>& run_rows, double threshold) {
  constexpr int kWindow = 5;
  double window_sum = 0.0;
  for (std::size_t i = 0; i < run_rows.size(); ++i) {
    window_sum += run_rows[i].success_rate;
    if (i >= kWindow) window_sum -= run_rows[i - kWindow].success_rate;
    const double mean = window_sum / std::min<std::size_t>(i + 1, kWindow);
    if (mean >= threshold) return run_rows[i].epoch;
  }
  return std::nullopt;
}

double final_success(const std::vector<MetricsRow>& run_rows, int last_k) {
  if (run_rows.empty()) return 0.0;
  const std::size_t k = std::min<std::size_t>(last_k, run_rows.size());
  double sum = 0.0;
  for (std::size_t i = run_rows.size() - k; i < run_rows.size(); ++i)
    sum += run_rows[i].success_rate;
  return sum / k;
}

double curve_auc(const std::vector<MetricsRow>& run_rows) {
  if (run_rows.empty()) return 0.0;
  double sum = 0.0;
  for (const MetricsRow& r : run_rows) sum += r.success_rate;
  return sum / run_rows.size();
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, xs.size() > 1 ? std::sqrt(v / (xs.size() - 1)) : 0.0};
}

}  // namespace

StrategySummary summarize(const std::string& label, const ExperimentResult& result) {
  StrategySummary s;
  s.label = label;
  s.runs = static_cast<int>(result.runs.size());
  std::vector<double> reach, finals, aucs;
  for (const RunResult& run : result.runs) {
    if (auto e = epochs_to_threshold(run.rows, 0.5)) {
      ++s.runs_reaching;
      reach.push_back(*e);
    }
    finals.push_back(final_success(run.rows));
    aucs.push_back(curve_auc(run.rows));
  }
  std::tie(s.mean_epochs_to_half, s.sd_epochs_to_half) = mean_sd(reach);
  std::tie(s.mean_final, s.sd_final) = mean_sd(finals);
  std::tie(s.mean_auc, s.sd_auc) = mean_sd(aucs);
  return s;
}

std::string env_signature(const SlotSchema& schema, const KnowledgeBase& kb,
                          const ExperimentConfig& cfg) {
  Environment probe(&schema, &kb, cfg.env, 0);
  std::string sig = probe.signature();
  char buf[96];
  std::snprintf(buf, sizeof(buf), "|kbseed=%llu|rows=%zu",
                static_cast<unsigned long long>(cfg.kb_seed), cfg.kb_rows);
  sig += buf;
  for (SlotId s = 0; s < schema.size(); ++s) {
    const SlotSpec& spec = schema.slot(s);
    sig += "|" + spec.name + ":" + std::to_string(spec.num_values) +
           (spec.informable ? "i" : "") + (spec.requestable ? "r" : "");
  }
  return sig;
}

std::vector<StrategySummary> compare_strategies(const SlotSchema& schema, const KnowledgeBase& kb,
                                                const std::vector<LabeledConfig>& configs,
                                                std::vector<ExperimentResult>* raw) {
  if (configs.size() < 2)
    throw std::invalid_argument("comparison needs at least two configurations");
  const std::string sig = env_signature(schema, kb, configs.front().config);
  for (const LabeledConfig& lc : configs)
    if (env_signature(schema, kb, lc.config) != sig)
      throw std::invalid_argument("refusing to compare configs with different environments");

  std::vector<StrategySummary> out;
  for (const LabeledConfig& lc : configs) {
    ExperimentResult r = run_experiment(schema, kb, lc.config);
    out.push_back(summarize(lc.label, r));
    if (raw) raw->push_back(std::move(r));
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "# metrics-csv v1\n";
  os << "run,epoch,success_rate,eval_success_rate,mean_reward,mean_turns,pool_size,"
        "generated_ther,generated_sher,discarded_stitches,epsilon\n";
  char buf[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.4f,%.4f,%.3f,%.3f,%zu,%ld,%ld,%ld,%.4f\n", r.run,
                  r.epoch, r.success_rate, r.eval_success_rate, r.mean_reward, r.mean_turns,
                  r.pool_size, r.generated_ther, r.generated_sher, r.discarded_stitches,
                  r.epsilon);
    os << buf;
  }
}

void write_summary_csv(std::ostream& os, const std::vector<StrategySummary>& summaries) {
  os << "# summary-csv v1\n";
  os << "label,runs,runs_reaching_half,mean_epochs_to_half,sd_epochs_to_half,mean_final,"
        "sd_final,mean_auc,sd_auc\n";
  char buf[256];
  for (const StrategySummary& s : summaries) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.2f,%.2f,%.4f,%.4f,%.4f,%.4f\n", s.label.c_str(),
                  s.runs, s.runs_reaching, s.mean_epochs_to_half, s.sd_epochs_to_half,
                  s.mean_final, s.sd_final, s.mean_auc, s.sd_auc);
    os << buf;
  }
}

}  // namespace dher
