#pragma once
#include <iosfwd>
#include <optional>
#include <string>

#include "dher/her.hpp"
#include "dher/learner.hpp"

namespace dher {

enum class Strategy : int {
  kEr = 0,      // uniform experience replay
  kPer,         // prioritized replay only
  kTHer,        // trimming relabels
  kSHer,        // stitching
  kTHerPer,
  kSHerPer,
  kTsHer,       // trimming + stitching
  kTsHerPer,
};

const char* strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);
bool strategy_uses_per(Strategy s);
bool strategy_uses_trim(Strategy s);
bool strategy_uses_stitch(Strategy s);

struct ExperimentConfig {
  Strategy strategy = Strategy::kEr;
  int epochs = 200;
  int episodes_per_epoch = 20;
  int n_runs = 5;
  std::uint64_t base_seed = 17;
  int warm_start_episodes = 12;
  double warm_target_accuracy = 0.65;  // clone accuracy on held-out turns
  std::size_t pool_capacity = 30000;
  int eval_episodes = 8;  // greedy probes per epoch
  std::size_t kb_rows = 120;
  std::uint64_t kb_seed = 11;
  EnvConfig env;
  // Relabeled segments at this scale have at most ~8 goal components against
  // a success bonus of 80; alpha 6 keeps their terminals worth a meaningful
  // fraction of a real win instead of rounding error. The junction bound is
  // opened up to let stitches cross dialogue contexts rather than only join
  // belief twins.
  HerConfig her = {.alpha = 6.0, .kl_threshold = 0.5};
  TrainConfig train;
  PerConfig per;

  void validate(const SlotSchema& schema) const;
};

struct MetricsRow {
  int run = 0;
  int epoch = 0;
  double success_rate = 0.0;       // training episodes this epoch
  double eval_success_rate = 0.0;  // separate greedy probes
  double mean_reward = 0.0;
  double mean_turns = 0.0;
  std::size_t pool_size = 0;
  long generated_ther = 0;  // cumulative within the run
  long generated_sher = 0;
  long discarded_stitches = 0;
  double epsilon = 0.0;
};

struct RunResult {
  std::vector<MetricsRow> rows;
  WarmStartResult warm;
  long attempted_stitches = 0;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<MetricsRow> rows;  // all runs, flattened in order
};

// End-of-run state handed back when a caller wants to snapshot it.
struct RunArtifacts {
  QNetwork net;
  std::optional<ExperiencePool> pool;
};

// One seed end to end: warm start, then epochs of ε-greedy episodes with the
// configured relabeling/stitching generators feeding the pool.
RunResult run_single(const SlotSchema& schema, const KnowledgeBase& kb,
                     const ExperimentConfig& cfg, int run_index,
                     RunArtifacts* artifacts = nullptr);

ExperimentResult run_experiment(const SlotSchema& schema, const KnowledgeBase& kb,
                                const ExperimentConfig& cfg);

// ---- curve summaries ----

// First epoch whose trailing moving average (window 5) of training success
// reaches `threshold`; nullopt if never.
std::optional<int> epochs_to_threshold(const std::vector<MetricsRow>& run_rows, double threshold);
double final_success(const std::vector<MetricsRow>& run_rows, int last_k = 10);
double curve_auc(const std::vector<MetricsRow>& run_rows);  // mean success over epochs

struct StrategySummary {
  std::string label;
  int runs = 0;
  int runs_reaching = 0;          // runs that hit the 0.5 threshold
  double mean_epochs_to_half = 0.0;  // over reaching runs
  double sd_epochs_to_half = 0.0;
  double mean_final = 0.0;
  double sd_final = 0.0;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
};

StrategySummary summarize(const std::string& label, const ExperimentResult& result);

// Fingerprint used to refuse apples-to-oranges comparisons.
std::string env_signature(const SlotSchema& schema, const KnowledgeBase& kb,
                          const ExperimentConfig& cfg);

struct LabeledConfig {
  std::string label;
  ExperimentConfig config;
};

// Runs every config against the shared environment and summarizes each.
// Configs whose environment fingerprints differ are refused up front.
std::vector<StrategySummary> compare_strategies(const SlotSchema& schema, const KnowledgeBase& kb,
                                                const std::vector<LabeledConfig>& configs,
                                                std::vector<ExperimentResult>* raw = nullptr);

// ---- output ----

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<StrategySummary>& summaries);

}  // namespace dher
