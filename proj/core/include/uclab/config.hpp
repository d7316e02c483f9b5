#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace uclab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnsembleMode { joint_min_pair, bootstrapped, deep_ensemble };
enum class UncertaintySource { predictive_std, q_std };
enum class BufferMode { uncertainty_per, td_error_per, uniform_her };

const char* to_string(EnsembleMode m);
const char* to_string(UncertaintySource s);
const char* to_string(BufferMode m);
EnsembleMode parse_ensemble_mode(const std::string& s);
UncertaintySource parse_uncertainty_source(const std::string& s);
BufferMode parse_buffer_mode(const std::string& s);

// One run's full parameterization. Defaults follow the reference setup; every
// field can come from a JSON config file and/or key=value overrides.
struct RunConfig {
  std::string maze = "m-maze:4";       // parse_maze_arg syntax or a maze file path
  std::uint64_t seed = 1;
  std::int64_t step_budget = 200000;

  // networks
  int hidden = 256;
  int depth = 2;
  int ensemble_size = 3;

  // training
  int batch = 1024;
  double gamma = 0.99;
  double actor_lr = 1e-3;
  double critic_lr = 2e-3;
  double predictive_lr = 5e-3;
  double polyak = 0.95;
  int initial_random_steps = 1000;
  double explore_noise = 0.2;          // Gaussian action-noise std
  double p_rand = 0.3;                 // random-action mixing probability

  // ensemble / uncertainty estimation
  EnsembleMode mode = EnsembleMode::joint_min_pair;
  UncertaintySource source = UncertaintySource::predictive_std;
  double noise_sigma = 0.0;            // Gaussian noise on raw uncertainty
  int probes = -1;                     // d; -1 = auto (8, or 16 for bootstrapped/deep)
  double keep_prob = 0.8;              // bootstrapped-mode Bernoulli mask rate
  bool target_actor_for_targets = true;
  bool predictive_into_backbone = true;

  // replay
  BufferMode buffer_mode = BufferMode::uncertainty_per;
  std::int64_t capacity = 1000000;
  int her_k = 4;
  double per_alpha = 1.0;
  double per_beta0 = 0.3;
  std::int64_t per_beta_steps = 200000;
  double priority_floor = 1e-6;
  bool priority_on_next_state = true;
  int priority_probes = 4;             // d used when refreshing priorities

  // curriculum
  double slope = 626.0;
  double intercept = -591.0;
  double threshold_coef = -1.6;
  int n_candidates = 1000;

  // evaluation
  int eval_every = 2000;
  int eval_episodes = 10;

  // io
  std::string out_dir = "runs/default";
  std::int64_t checkpoint_every = 0;   // env steps; 0 = final checkpoint only

  // d with the auto rule applied
  int effective_probes() const {
    if (probes > 0) return probes;
    return mode == EnsembleMode::joint_min_pair ? 8 : 16;
  }

  void validate() const;               // throws ConfigError
};

RunConfig load_config(const std::string& path);            // JSON file
void apply_override(RunConfig& cfg, const std::string& kv);  // "key=value"
std::string dump_config(const RunConfig& cfg);             // JSON text

}  // namespace uclab
