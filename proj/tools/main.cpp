// Command-line front end: train/compare replay strategies on the slot-filling
// booking simulator and write metrics CSVs, plus import/export helpers for
// the knowledge base, relabeled-dialogue dumps, and trained-net snapshots.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dher/assess.hpp"
#include "dher/config.hpp"
#include "dher/harness.hpp"

namespace {

using namespace dher;

struct CommonOpts {
  std::string config_path;
  std::string schema_path;
  bool paper_scale = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "experiment config JSON");
  cmd->add_option("--schema", o.schema_path, "slot schema JSON (default: built-in desk schema)");
  cmd->add_flag("--paper-scale", o.paper_scale,
                "full-size domain and training budget (slow)");
}

ExperimentConfig base_config(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = load_experiment_file(o.config_path);
  if (o.paper_scale) {
    cfg.epochs = 1000;
    cfg.episodes_per_epoch = 100;
    cfg.pool_capacity = 100000;
    cfg.kb_rows = 1000;
    cfg.eval_episodes = 20;
  }
  return cfg;
}

SlotSchema pick_schema(const CommonOpts& o) {
  if (!o.schema_path.empty()) return load_schema_file(o.schema_path);
  return o.paper_scale ? full_schema() : desk_schema();
}

KnowledgeBase make_kb(const SlotSchema& schema, const ExperimentConfig& cfg,
                      const std::string& import_path) {
  if (!import_path.empty()) {
    std::ifstream in(import_path);
    if (!in) throw std::runtime_error("cannot open KB file: " + import_path);
    return KnowledgeBase::import_jsonl(&schema, in);
  }
  return KnowledgeBase::generate(&schema, cfg.kb_rows, cfg.kb_seed);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  return out;
}

nlohmann::json goal_json(const Goal& g, const SlotSchema& schema) {
  nlohmann::json jc = nlohmann::json::object();
  for (const auto& [s, v] : g.constraints) jc[schema.slot(s).name] = v;
  nlohmann::json jr = nlohmann::json::array();
  for (SlotId s : g.requests) jr.push_back(schema.slot(s).name);
  return {{"constraints", jc}, {"requests", jr}};
}

nlohmann::json episode_json(const Episode& e, const SlotSchema& schema) {
  nlohmann::json turns = nlohmann::json::array();
  for (const Transition& t : e.turns)
    turns.push_back({{"turn", t.state.turn},
                     {"system", to_string(t.sys_act, schema)},
                     {"user", to_string(t.user_act, schema)},
                     {"reward", t.reward},
                     {"terminal", t.terminal}});
  return {{"goal", goal_json(e.goal, schema)}, {"turns", turns}};
}

// Roll noisy episodes with a freshly initialized net and dump everything the
// trimming/stitching generators produce, one JSON object per line.
void dump_relabeled(const SlotSchema& schema, const KnowledgeBase& kb,
                    const ExperimentConfig& cfg, int episodes, const std::string& path) {
  std::ofstream out = open_out(path);
  Environment env(&schema, &kb, cfg.env, splitmix64(cfg.base_seed ^ 0x64756d70ull));
  RandomStream pol_rng = RandomStream::derive(cfg.base_seed, 0x64756d70ull);
  RandomStream init_rng = RandomStream::derive(cfg.base_seed, 0x696e6974ull);
  QNetwork net = QNetwork::init(encoded_dim(schema, cfg.env.max_turns), cfg.train.hidden,
                                kNumActTypes, init_rng);
  TailPool tails(cfg.her.tail_pool_capacity);
  const AssessFn assess = [&kb](const Goal& g, const Episode& e) {
    return assess_success(g, e, kb);
  };

  long trims = 0, stitches = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset();
    while (!env.done()) {
      const auto x = encode_state(env.state(), schema, cfg.env.max_turns);
      env.step(act_epsilon_greedy(net, x, cfg.train.epsilon_start, pol_rng));
    }
    const Episode episode = env.take_episode();
    if (episode.outcome == DialogueOutcome::kFailure) {
      for (const Episode& gen : trim_her(episode, assess, cfg.her)) {
        nlohmann::json j = episode_json(gen, schema);
        j["kind"] = "trim";
        out << j.dump() << "\n";
        ++trims;
      }
    }
    for (const StitchRecord& rec : stitch_her(episode, tails, assess, cfg.her)) {
      nlohmann::json j = episode_json(rec.episode, schema);
      j["kind"] = "stitch";
      j["head_len"] = rec.head_len;
      j["junction_kl"] = rec.junction_kl;
      out << j.dump() << "\n";
      ++stitches;
    }
  }
  std::fprintf(stderr, "dumped %ld trimmed and %ld stitched dialogues to %s\n", trims, stitches,
               path.c_str());
}

void report(const std::vector<StrategySummary>& summaries) {
  for (const StrategySummary& s : summaries)
    std::printf("%-14s runs=%d reached_half=%d mean_epochs_to_half=%.1f final=%.3f auc=%.3f\n",
                s.label.c_str(), s.runs, s.runs_reaching, s.mean_epochs_to_half, s.mean_final,
                s.mean_auc);
}

void write_metrics_file(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out = open_out(path);
  write_metrics_csv(out, rows);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int cmd_run(const CommonOpts& common, const std::string& strategy_name_opt,
            std::uint64_t seed, bool seed_set, int runs, int epochs,
            const std::string& out_path, const std::string& summary_path,
            const std::string& kb_import, const std::string& kb_export,
            const std::string& her_dump, int her_dump_episodes, const std::string& params_out,
            const std::string& pool_out) {
  ExperimentConfig cfg = base_config(common);
  if (!strategy_name_opt.empty()) {
    const auto s = parse_strategy(strategy_name_opt);
    if (!s) throw std::invalid_argument("unknown strategy \"" + strategy_name_opt + "\"");
    cfg.strategy = *s;
  }
  if (seed_set) cfg.base_seed = seed;
  if (runs > 0) cfg.n_runs = runs;
  if (epochs > 0) cfg.epochs = epochs;

  const SlotSchema schema = pick_schema(common);
  cfg.validate(schema);
  const KnowledgeBase kb = make_kb(schema, cfg, kb_import);
  if (!kb_export.empty()) {
    std::ofstream out = open_out(kb_export);
    kb.export_jsonl(out);
  }
  if (!her_dump.empty()) dump_relabeled(schema, kb, cfg, her_dump_episodes, her_dump);

  ExperimentResult result;
  RunArtifacts artifacts;
  for (int run = 0; run < cfg.n_runs; ++run) {
    result.runs.push_back(run_single(schema, kb, cfg, run, run == 0 ? &artifacts : nullptr));
    for (const MetricsRow& row : result.runs.back().rows) result.rows.push_back(row);
    std::fprintf(stderr, "run %d/%d: warm_greedy=%.2f final=%.3f\n", run + 1, cfg.n_runs,
                 result.runs.back().warm.greedy_success,
                 final_success(result.runs.back().rows));
  }
  if (!params_out.empty()) {
    std::ofstream out = open_out(params_out);
    artifacts.net.save(out);
  }
  if (!pool_out.empty()) {
    std::ofstream out = open_out(pool_out);
    artifacts.pool->save(out);
  }
  if (!out_path.empty())
    write_metrics_file(out_path, result.rows);
  else
    write_metrics_csv(std::cout, result.rows);

  const std::vector<StrategySummary> summaries = {
      summarize(strategy_name(cfg.strategy), result)};
  if (!summary_path.empty()) {
    std::ofstream out = open_out(summary_path);
    write_summary_csv(out, summaries);
  }
  report(summaries);
  return 0;
}

int cmd_compare(const CommonOpts& common, const std::string& strategies_csv,
                const std::string& out_dir) {
  ExperimentConfig cfg = base_config(common);
  const SlotSchema schema = pick_schema(common);
  const KnowledgeBase kb = make_kb(schema, cfg, "");

  std::vector<LabeledConfig> configs;
  for (const std::string& name : split_csv(strategies_csv)) {
    const auto s = parse_strategy(name);
    if (!s) throw std::invalid_argument("unknown strategy \"" + name + "\"");
    ExperimentConfig c = cfg;
    c.strategy = *s;
    c.validate(schema);
    configs.push_back({name, c});
  }

  std::vector<ExperimentResult> raw;
  const std::vector<StrategySummary> summaries = compare_strategies(schema, kb, configs, &raw);
  for (std::size_t i = 0; i < configs.size(); ++i)
    write_metrics_file(out_dir + "/metrics_" + configs[i].label + ".csv", raw[i].rows);
  std::ofstream out = open_out(out_dir + "/summary.csv");
  write_summary_csv(out, summaries);
  report(summaries);
  return 0;
}

int cmd_sweep_kl(const CommonOpts& common, const std::string& eps_csv,
                 const std::string& out_dir) {
  ExperimentConfig cfg = base_config(common);
  if (!strategy_uses_stitch(cfg.strategy)) cfg.strategy = Strategy::kSHer;
  const SlotSchema schema = pick_schema(common);
  const KnowledgeBase kb = make_kb(schema, cfg, "");

  std::vector<LabeledConfig> configs;
  for (const std::string& tok : split_csv(eps_csv)) {
    ExperimentConfig c = cfg;
    c.her.kl_threshold = std::stod(tok);
    c.validate(schema);
    configs.push_back({"eps=" + tok, c});
  }
  std::vector<ExperimentResult> raw;
  const std::vector<StrategySummary> summaries = compare_strategies(schema, kb, configs, &raw);
  for (std::size_t i = 0; i < configs.size(); ++i)
    write_metrics_file(out_dir + "/metrics_" + configs[i].label + ".csv", raw[i].rows);
  std::ofstream out = open_out(out_dir + "/summary.csv");
  write_summary_csv(out, summaries);
  report(summaries);
  return 0;
}

int cmd_cold_start(const CommonOpts& common, const std::string& out_dir) {
  ExperimentConfig cfg = base_config(common);
  cfg.warm_start_episodes = 0;
  cfg.pool_capacity = 1000;
  const SlotSchema schema = pick_schema(common);
  const KnowledgeBase kb = make_kb(schema, cfg, "");

  std::vector<LabeledConfig> configs;
  for (Strategy s : {Strategy::kEr, Strategy::kPer, Strategy::kSHer, Strategy::kTsHer}) {
    ExperimentConfig c = cfg;
    c.strategy = s;
    c.validate(schema);
    configs.push_back({strategy_name(s), c});
  }
  std::vector<ExperimentResult> raw;
  const std::vector<StrategySummary> summaries = compare_strategies(schema, kb, configs, &raw);
  for (std::size_t i = 0; i < configs.size(); ++i)
    write_metrics_file(out_dir + "/metrics_" + configs[i].label + ".csv", raw[i].rows);
  std::ofstream out = open_out(out_dir + "/summary.csv");
  write_summary_csv(out, summaries);
  report(summaries);
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& params_path, int episodes,
             std::uint64_t seed) {
  ExperimentConfig cfg = base_config(common);
  const SlotSchema schema = pick_schema(common);
  const KnowledgeBase kb = make_kb(schema, cfg, "");

  std::ifstream in(params_path);
  if (!in) throw std::runtime_error("cannot open params file: " + params_path);
  const QNetwork net = QNetwork::load(in);

  Environment env(&schema, &kb, cfg.env, seed);
  int wins = 0;
  double reward = 0.0;
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    while (!env.done())
      env.step(greedy_action(net, encode_state(env.state(), schema, cfg.env.max_turns)));
    const Episode ep = env.take_episode();
    if (ep.outcome == DialogueOutcome::kSuccess) ++wins;
    reward += ep.total_reward();
  }
  std::printf("episodes=%d success=%.3f mean_reward=%.2f\n", episodes,
              static_cast<double>(wins) / episodes, reward / episodes);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-oriented dialogue RL workbench"};
  app.require_subcommand(1);

  CommonOpts run_c, cmp_c, kl_c, cold_c, eval_c;
  std::string strategy, run_out, run_summary, kb_import, kb_export, her_dump, params_out,
      pool_out;
  std::uint64_t seed = 0;
  int runs = 0, epochs = 0, her_dump_episodes = 300;

  CLI::App* run = app.add_subcommand("run", "train one strategy and write a metrics CSV");
  add_common(run, run_c);
  run->add_option("--strategy", strategy, "ER, PER, T-HER, S-HER, T-HER+PER, ...");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "base seed");
  run->add_option("--runs", runs, "number of independent runs");
  run->add_option("--epochs", epochs, "training epochs per run");
  run->add_option("--out", run_out, "metrics CSV path (default: stdout)");
  run->add_option("--summary", run_summary, "summary CSV path");
  run->add_option("--kb-import", kb_import, "load the knowledge base from JSONL");
  run->add_option("--kb-export", kb_export, "write the knowledge base as JSONL");
  run->add_option("--her-dump", her_dump, "write relabeled dialogues as JSONL");
  run->add_option("--her-dump-episodes", her_dump_episodes, "episodes for --her-dump");
  run->add_option("--params-out", params_out, "save run 0's trained net");
  run->add_option("--pool-out", pool_out, "save run 0's final replay pool");

  std::string strategies = "ER,T-HER,S-HER", cmp_dir = ".";
  CLI::App* cmp = app.add_subcommand("compare", "train several strategies on one environment");
  add_common(cmp, cmp_c);
  cmp->add_option("--strategies", strategies, "comma-separated strategy names");
  cmp->add_option("--out-dir", cmp_dir, "directory for per-strategy metrics + summary.csv");

  std::string eps_list = "0.05,0.2,0.5,2.0", kl_dir = ".";
  CLI::App* kl = app.add_subcommand("sweep-kl", "stitching threshold sweep");
  add_common(kl, kl_c);
  kl->add_option("--eps", eps_list, "comma-separated thresholds (nats)");
  kl->add_option("--out-dir", kl_dir, "directory for per-threshold metrics + summary.csv");

  std::string cold_dir = ".";
  CLI::App* cold = app.add_subcommand("cold-start", "no warm start, small pool");
  add_common(cold, cold_c);
  cold->add_option("--out-dir", cold_dir, "directory for per-strategy metrics + summary.csv");

  std::string eval_params;
  int eval_episodes = 200;
  std::uint64_t eval_seed = 99;
  CLI::App* ev = app.add_subcommand("eval", "greedy rollouts with a saved net");
  add_common(ev, eval_c);
  ev->add_option("--params", eval_params, "saved net file")->required();
  ev->add_option("--episodes", eval_episodes, "number of rollouts");
  ev->add_option("--seed", eval_seed, "environment seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run_c, strategy, seed, seed_opt->count() > 0, runs, epochs, run_out,
                     run_summary, kb_import, kb_export, her_dump, her_dump_episodes, params_out,
                     pool_out);
    if (cmp->parsed()) return cmd_compare(cmp_c, strategies, cmp_dir);
    if (kl->parsed()) return cmd_sweep_kl(kl_c, eps_list, kl_dir);
    if (cold->parsed()) return cmd_cold_start(cold_c, cold_dir);
    if (ev->parsed()) return cmd_eval(eval_c, eval_params, eval_episodes, eval_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
