#include "uclab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace uclab {

using nlohmann::json;

const char* to_string(EnsembleMode m) {
  switch (m) {
    case EnsembleMode::joint_min_pair: return "joint-min-pair";
    case EnsembleMode::bootstrapped: return "bootstrapped";
    case EnsembleMode::deep_ensemble: return "deep-ensemble";
  }
  return "?";
}

const char* to_string(UncertaintySource s) {
  switch (s) {
    case UncertaintySource::predictive_std: return "predictive-std";
    case UncertaintySource::q_std: return "q-std";
  }
  return "?";
}

const char* to_string(BufferMode m) {
  switch (m) {
    case BufferMode::uncertainty_per: return "uncertainty-per";
    case BufferMode::td_error_per: return "td-error-per";
    case BufferMode::uniform_her: return "uniform-her";
  }
  return "?";
}

EnsembleMode parse_ensemble_mode(const std::string& s) {
  if (s == "joint-min-pair") return EnsembleMode::joint_min_pair;
  if (s == "bootstrapped") return EnsembleMode::bootstrapped;
  if (s == "deep-ensemble") return EnsembleMode::deep_ensemble;
  throw ConfigError("unknown ensemble mode: " + s);
}

UncertaintySource parse_uncertainty_source(const std::string& s) {
  if (s == "predictive-std") return UncertaintySource::predictive_std;
  if (s == "q-std") return UncertaintySource::q_std;
  throw ConfigError("unknown uncertainty source: " + s);
}

BufferMode parse_buffer_mode(const std::string& s) {
  if (s == "uncertainty-per") return BufferMode::uncertainty_per;
  if (s == "td-error-per") return BufferMode::td_error_per;
  if (s == "uniform-her") return BufferMode::uniform_her;
  throw ConfigError("unknown buffer mode: " + s);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (maze.empty()) fail("maze is empty");
  if (step_budget <= 0) fail("step_budget must be positive");
  if (hidden <= 0) fail("hidden must be positive");
  if (depth <= 0) fail("depth must be positive");
  if (ensemble_size <= 0) fail("ensemble_size must be positive");
  if (batch <= 0) fail("batch must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must be in (0,1)");
  for (auto [v, n] : {std::pair<double, const char*>{actor_lr, "actor_lr"},
                      {critic_lr, "critic_lr"},
                      {predictive_lr, "predictive_lr"}})
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(n) + " must be positive");
  if (!(polyak >= 0.0 && polyak <= 1.0)) fail("polyak must be in [0,1]");
  if (initial_random_steps < 0) fail("initial_random_steps must be non-negative");
  if (explore_noise < 0.0) fail("explore_noise must be non-negative");
  if (!(p_rand >= 0.0 && p_rand <= 1.0)) fail("p_rand must be in [0,1]");
  if (noise_sigma < 0.0) fail("noise_sigma must be non-negative");
  if (probes == 0 || probes < -1) fail("probes must be positive or -1 (auto)");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) fail("keep_prob must be in (0,1]");
  if (capacity <= 0) fail("capacity must be positive");
  if (capacity < batch) fail("capacity must be >= batch");
  if (her_k < 0) fail("her_k must be non-negative");
  if (per_alpha < 0.0) fail("per_alpha must be non-negative");
  if (!(per_beta0 >= 0.0 && per_beta0 <= 1.0)) fail("per_beta0 must be in [0,1]");
  if (per_beta_steps <= 0) fail("per_beta_steps must be positive");
  if (!(priority_floor > 0.0)) fail("priority_floor must be positive");
  if (priority_probes <= 0) fail("priority_probes must be positive");
  if (n_candidates < 1) fail("n_candidates must be >= 1");
  if (eval_every <= 0) fail("eval_every must be positive");
  if (eval_episodes <= 0) fail("eval_episodes must be positive");
  if (checkpoint_every < 0) fail("checkpoint_every must be non-negative");
  if (out_dir.empty()) fail("out_dir is empty");
}

namespace {

json to_json(const RunConfig& c) {
  return json{{"maze", c.maze},
              {"seed", c.seed},
              {"step_budget", c.step_budget},
              {"hidden", c.hidden},
              {"depth", c.depth},
              {"ensemble_size", c.ensemble_size},
              {"batch", c.batch},
              {"gamma", c.gamma},
              {"actor_lr", c.actor_lr},
              {"critic_lr", c.critic_lr},
              {"predictive_lr", c.predictive_lr},
              {"polyak", c.polyak},
              {"initial_random_steps", c.initial_random_steps},
              {"explore_noise", c.explore_noise},
              {"p_rand", c.p_rand},
              {"mode", to_string(c.mode)},
              {"source", to_string(c.source)},
              {"noise_sigma", c.noise_sigma},
              {"probes", c.probes},
              {"keep_prob", c.keep_prob},
              {"target_actor_for_targets", c.target_actor_for_targets},
              {"predictive_into_backbone", c.predictive_into_backbone},
              {"buffer_mode", to_string(c.buffer_mode)},
              {"capacity", c.capacity},
              {"her_k", c.her_k},
              {"per_alpha", c.per_alpha},
              {"per_beta0", c.per_beta0},
              {"per_beta_steps", c.per_beta_steps},
              {"priority_floor", c.priority_floor},
              {"priority_on_next_state", c.priority_on_next_state},
              {"priority_probes", c.priority_probes},
              {"slope", c.slope},
              {"intercept", c.intercept},
              {"threshold_coef", c.threshold_coef},
              {"n_candidates", c.n_candidates},
              {"eval_every", c.eval_every},
              {"eval_episodes", c.eval_episodes},
              {"out_dir", c.out_dir},
              {"checkpoint_every", c.checkpoint_every}};
}

// Applies one parsed JSON value to the named field. Shared by file loading and
// key=value overrides so both accept exactly the same keys.
void set_field(RunConfig& c, const std::string& key, const json& v) {
  try {
    if (key == "maze") c.maze = v.get<std::string>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "step_budget") c.step_budget = v.get<std::int64_t>();
    else if (key == "hidden") c.hidden = v.get<int>();
    else if (key == "depth") c.depth = v.get<int>();
    else if (key == "ensemble_size") c.ensemble_size = v.get<int>();
    else if (key == "batch") c.batch = v.get<int>();
    else if (key == "gamma") c.gamma = v.get<double>();
    else if (key == "actor_lr") c.actor_lr = v.get<double>();
    else if (key == "critic_lr") c.critic_lr = v.get<double>();
    else if (key == "predictive_lr") c.predictive_lr = v.get<double>();
    else if (key == "polyak") c.polyak = v.get<double>();
    else if (key == "initial_random_steps") c.initial_random_steps = v.get<int>();
    else if (key == "explore_noise") c.explore_noise = v.get<double>();
    else if (key == "p_rand") c.p_rand = v.get<double>();
    else if (key == "mode") c.mode = parse_ensemble_mode(v.get<std::string>());
    else if (key == "source") c.source = parse_uncertainty_source(v.get<std::string>());
    else if (key == "noise_sigma") c.noise_sigma = v.get<double>();
    else if (key == "probes") c.probes = v.get<int>();
    else if (key == "keep_prob") c.keep_prob = v.get<double>();
    else if (key == "target_actor_for_targets") c.target_actor_for_targets = v.get<bool>();
    else if (key == "predictive_into_backbone") c.predictive_into_backbone = v.get<bool>();
    else if (key == "buffer_mode") c.buffer_mode = parse_buffer_mode(v.get<std::string>());
    else if (key == "capacity") c.capacity = v.get<std::int64_t>();
    else if (key == "her_k") c.her_k = v.get<int>();
    else if (key == "per_alpha") c.per_alpha = v.get<double>();
    else if (key == "per_beta0") c.per_beta0 = v.get<double>();
    else if (key == "per_beta_steps") c.per_beta_steps = v.get<std::int64_t>();
    else if (key == "priority_floor") c.priority_floor = v.get<double>();
    else if (key == "priority_on_next_state") c.priority_on_next_state = v.get<bool>();
    else if (key == "priority_probes") c.priority_probes = v.get<int>();
    else if (key == "slope") c.slope = v.get<double>();
    else if (key == "intercept") c.intercept = v.get<double>();
    else if (key == "threshold_coef") c.threshold_coef = v.get<double>();
    else if (key == "n_candidates") c.n_candidates = v.get<int>();
    else if (key == "eval_every") c.eval_every = v.get<int>();
    else if (key == "eval_episodes") c.eval_episodes = v.get<int>();
    else if (key == "out_dir") c.out_dir = v.get<std::string>();
    else if (key == "checkpoint_every") c.checkpoint_every = v.get<std::int64_t>();
    else throw ConfigError("unknown config key: " + key);
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object: " + path);
  RunConfig c;
  for (const auto& [key, value] : j.items()) set_field(c, key, value);
  return c;
}

void apply_override(RunConfig& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must be key=value: " + kv);
  const std::string key = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  // Parse the value leniently: JSON literal if it parses, else a bare string.
  json v = json::parse(raw, nullptr, false);
  if (v.is_discarded()) v = raw;
  set_field(cfg, key, v);
}

std::string dump_config(const RunConfig& cfg) { return to_json(cfg).dump(2); }

}  // namespace uclab
