#include "dher/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dher {

using nlohmann::json;

namespace {

json parse_or_throw(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("malformed JSON config");
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw std::invalid_argument(std::string("unknown key \"") + item.key() + "\" in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SlotSchema load_schema_json(const std::string& text) {
  const json j = parse_or_throw(text);
  reject_unknown(j, {"slots", "booking_slot"}, "schema");
  if (!j.contains("slots") || !j.contains("booking_slot"))
    throw std::invalid_argument("schema needs \"slots\" and \"booking_slot\"");

  const std::string booking = j.at("booking_slot").get<std::string>();
  std::vector<SlotSpec> slots;
  int booking_index = -1;
  for (const json& js : j.at("slots")) {
    reject_unknown(js, {"name", "values", "informable", "requestable"}, "slot entry");
    SlotSpec s;
    s.name = js.at("name").get<std::string>();
    s.num_values = js.at("values").get<int>();
    read(js, "informable", s.informable);
    read(js, "requestable", s.requestable);
    if (s.name == booking) {
      if (booking_index >= 0) throw std::invalid_argument("duplicate booking slot");
      booking_index = static_cast<int>(slots.size());
      s.informable = false;  // the deal-closing slot is requested, never constrained
    }
    slots.push_back(std::move(s));
  }
  if (booking_index < 0)
    throw std::invalid_argument("booking_slot \"" + booking + "\" not among slots");
  return SlotSchema(std::move(slots), booking_index);
}

SlotSchema load_schema_file(const std::string& path) { return load_schema_json(slurp(path)); }

ExperimentConfig load_experiment_json(const std::string& text) {
  const json j = parse_or_throw(text);
  reject_unknown(j,
                 {"strategy", "epochs", "episodes_per_epoch", "n_runs", "base_seed",
                  "warm_start_episodes", "warm_target_accuracy", "pool_capacity", "eval_episodes", "kb_rows", "kb_seed",
                  "env", "her", "train", "per"},
                 "experiment config");

  ExperimentConfig cfg;
  if (j.contains("strategy")) {
    const std::string name = j.at("strategy").get<std::string>();
    const auto s = parse_strategy(name);
    if (!s) throw std::invalid_argument("unknown strategy \"" + name + "\"");
    cfg.strategy = *s;
  }
  read(j, "epochs", cfg.epochs);
  read(j, "episodes_per_epoch", cfg.episodes_per_epoch);
  read(j, "n_runs", cfg.n_runs);
  read(j, "base_seed", cfg.base_seed);
  read(j, "warm_start_episodes", cfg.warm_start_episodes);
  read(j, "warm_target_accuracy", cfg.warm_target_accuracy);
  read(j, "pool_capacity", cfg.pool_capacity);
  read(j, "eval_episodes", cfg.eval_episodes);
  read(j, "kb_rows", cfg.kb_rows);
  read(j, "kb_seed", cfg.kb_seed);

  if (j.contains("env")) {
    const json& je = j.at("env");
    reject_unknown(je,
                   {"success_bonus", "failure_penalty", "per_turn_cost", "max_turns",
                    "belief_noise", "noise_fraction_lo", "noise_fraction_hi", "smoothing_floor",
                    "ema_rate", "patience", "bad_book_limit", "volunteer_prob",
                    "volunteer_two_prob", "goal_max_constraints"},
                   "env");
    read(je, "success_bonus", cfg.env.success_bonus);
    read(je, "failure_penalty", cfg.env.failure_penalty);
    read(je, "per_turn_cost", cfg.env.per_turn_cost);
    read(je, "max_turns", cfg.env.max_turns);
    read(je, "belief_noise", cfg.env.belief_noise);
    read(je, "noise_fraction_lo", cfg.env.noise_fraction_lo);
    read(je, "noise_fraction_hi", cfg.env.noise_fraction_hi);
    read(je, "smoothing_floor", cfg.env.smoothing_floor);
    read(je, "ema_rate", cfg.env.ema_rate);
    read(je, "patience", cfg.env.patience);
    read(je, "bad_book_limit", cfg.env.bad_book_limit);
    read(je, "volunteer_prob", cfg.env.volunteer_prob);
    read(je, "volunteer_two_prob", cfg.env.volunteer_two_prob);
    read(je, "goal_max_constraints", cfg.env.goal_max_constraints);
  }
  if (j.contains("her")) {
    const json& jh = j.at("her");
    reject_unknown(jh,
                   {"alpha", "kl_threshold", "r_max", "max_stitches_per_dialogue",
                    "tail_pool_capacity", "tail_reuse_limit", "kl_aggregate", "max_turns"},
                   "her");
    read(jh, "alpha", cfg.her.alpha);
    read(jh, "kl_threshold", cfg.her.kl_threshold);
    read(jh, "r_max", cfg.her.r_max);
    read(jh, "max_stitches_per_dialogue", cfg.her.max_stitches_per_dialogue);
    read(jh, "tail_pool_capacity", cfg.her.tail_pool_capacity);
    read(jh, "tail_reuse_limit", cfg.her.tail_reuse_limit);
    read(jh, "max_turns", cfg.her.max_turns);
    if (jh.contains("kl_aggregate")) {
      const std::string agg = jh.at("kl_aggregate").get<std::string>();
      if (agg == "sum")
        cfg.her.kl_aggregate = KlAggregate::kSum;
      else if (agg == "max")
        cfg.her.kl_aggregate = KlAggregate::kMax;
      else
        throw std::invalid_argument("kl_aggregate must be \"sum\" or \"max\"");
    }
  }
  if (j.contains("train")) {
    const json& jt = j.at("train");
    reject_unknown(jt,
                   {"gamma", "learning_rate", "reward_scale", "batch_size", "epsilon_start", "epsilon_end",
                    "hidden", "grad_clip", "target_sync_period"},
                   "train");
    read(jt, "gamma", cfg.train.gamma);
    read(jt, "learning_rate", cfg.train.learning_rate);
    read(jt, "reward_scale", cfg.train.reward_scale);
    read(jt, "batch_size", cfg.train.batch_size);
    read(jt, "epsilon_start", cfg.train.epsilon_start);
    read(jt, "epsilon_end", cfg.train.epsilon_end);
    read(jt, "hidden", cfg.train.hidden);
    read(jt, "grad_clip", cfg.train.grad_clip);
    read(jt, "target_sync_period", cfg.train.target_sync_period);
  }
  if (j.contains("per")) {
    const json& jp = j.at("per");
    reject_unknown(jp, {"priority_exponent", "importance_start", "importance_end",
                        "priority_floor"},
                   "per");
    read(jp, "priority_exponent", cfg.per.priority_exponent);
    read(jp, "importance_start", cfg.per.importance_start);
    read(jp, "importance_end", cfg.per.importance_end);
    read(jp, "priority_floor", cfg.per.priority_floor);
  }
  return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
  return load_experiment_json(slurp(path));
}

std::string experiment_to_json(const ExperimentConfig& cfg) {
  json j;
  j["strategy"] = strategy_name(cfg.strategy);
  j["epochs"] = cfg.epochs;
  j["episodes_per_epoch"] = cfg.episodes_per_epoch;
  j["n_runs"] = cfg.n_runs;
  j["base_seed"] = cfg.base_seed;
  j["warm_start_episodes"] = cfg.warm_start_episodes;
  j["warm_target_accuracy"] = cfg.warm_target_accuracy;
  j["pool_capacity"] = cfg.pool_capacity;
  j["eval_episodes"] = cfg.eval_episodes;
  j["kb_rows"] = cfg.kb_rows;
  j["kb_seed"] = cfg.kb_seed;
  j["env"] = {{"success_bonus", cfg.env.success_bonus},
              {"failure_penalty", cfg.env.failure_penalty},
              {"per_turn_cost", cfg.env.per_turn_cost},
              {"max_turns", cfg.env.max_turns},
              {"belief_noise", cfg.env.belief_noise},
              {"noise_fraction_lo", cfg.env.noise_fraction_lo},
              {"noise_fraction_hi", cfg.env.noise_fraction_hi},
              {"smoothing_floor", cfg.env.smoothing_floor},
              {"ema_rate", cfg.env.ema_rate},
              {"patience", cfg.env.patience},
              {"bad_book_limit", cfg.env.bad_book_limit},
              {"volunteer_prob", cfg.env.volunteer_prob},
              {"volunteer_two_prob", cfg.env.volunteer_two_prob},
              {"goal_max_constraints", cfg.env.goal_max_constraints}};
  j["her"] = {{"alpha", cfg.her.alpha},
              {"kl_threshold", cfg.her.kl_threshold},
              {"r_max", cfg.her.r_max},
              {"max_stitches_per_dialogue", cfg.her.max_stitches_per_dialogue},
              {"tail_pool_capacity", cfg.her.tail_pool_capacity},
              {"tail_reuse_limit", cfg.her.tail_reuse_limit},
              {"kl_aggregate", cfg.her.kl_aggregate == KlAggregate::kSum ? "sum" : "max"},
              {"max_turns", cfg.her.max_turns}};
  j["train"] = {{"gamma", cfg.train.gamma},
                {"learning_rate", cfg.train.learning_rate},
                {"reward_scale", cfg.train.reward_scale},
                {"batch_size", cfg.train.batch_size},
                {"epsilon_start", cfg.train.epsilon_start},
                {"epsilon_end", cfg.train.epsilon_end},
                {"hidden", cfg.train.hidden},
                {"grad_clip", cfg.train.grad_clip},
                {"target_sync_period", cfg.train.target_sync_period}};
  j["per"] = {{"priority_exponent", cfg.per.priority_exponent},
              {"importance_start", cfg.per.importance_start},
              {"importance_end", cfg.per.importance_end},
              {"priority_floor", cfg.per.priority_floor}};
  return j.dump(2);
}

}  // namespace dher
