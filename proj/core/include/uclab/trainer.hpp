#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "uclab/agent.hpp"
#include "uclab/config.hpp"
#include "uclab/curriculum.hpp"
#include "uclab/ensemble.hpp"
#include "uclab/env.hpp"
#include "uclab/replay.hpp"

namespace uclab {

struct RunMetrics {
  std::int64_t env_steps = 0;
  std::int64_t episodes = 0;
  std::int64_t updates = 0;
  std::vector<std::pair<std::int64_t, double>> evals;   // (env step, success rate)
  std::int64_t steps_to_convergence = -1;               // first eval of the perfect pair
  double final_success = 0.0;

  bool converged() const { return steps_to_convergence >= 0; }
};

// Wires env, ensemble, actor, replay, and curriculum into the training loop:
// per episode, goals come from the curriculum once the buffer holds the warmup
// data (resampled on every mid-episode success); per environment step past
// warmup, one full gradient cycle runs (sample -> targets -> critic ->
// predictive -> actor -> polyak -> priority refresh). Evaluation happens every
// eval_every steps; convergence is success 1.0 on two consecutive evaluations.
//
// All randomness derives from named child streams of one root seed, so runs
// are bitwise reproducible per config+seed, and metrics are appended to
// <out_dir>/metrics.csv, flushed at every evaluation (see README for the
// column glossary).
class Trainer {
public:
  explicit Trainer(RunConfig cfg);

  RunMetrics train();

  // Deterministic-policy evaluation on environment-sampled episodes; no
  // curriculum, no exploration noise.
  double evaluate(int episodes);

  // One gradient update cycle; false if the buffer cannot fill a batch yet.
  bool update_once();

  CriticEnsemble& ensemble() { return ensemble_; }
  Actor& actor() { return actor_; }
  HindsightReplay& replay() { return replay_; }
  MazeEnv& env() { return env_; }
  const MazeSpec& maze() const { return maze_; }
  const RunConfig& config() const { return cfg_; }
  std::int64_t env_steps() const { return env_steps_; }

private:
  RunConfig cfg_;
  MazeSpec maze_;
  MazeEnv env_;
  Rng root_;
  Rng env_rng_, act_rng_, target_rng_, cand_rng_, sample_rng_, prio_rng_, eval_rng_;
  CriticEnsemble ensemble_;
  Actor actor_;
  HindsightReplay replay_;
  SelectionParams sel_;

  std::int64_t env_steps_ = 0;
  std::int64_t episodes_ = 0;
  std::int64_t updates_ = 0;
  double acc_critic_ = 0, acc_pred_ = 0, acc_actor_ = 0;
  std::int64_t acc_n_ = 0;
  std::ofstream metrics_;

  void open_metrics();
  void log_episode(double ep_return);
  void log_select(const GoalSelection& sel);
  void log_eval(double success, double beta);
  void log_marker(const char* event);
};

RunMetrics train_run(const RunConfig& cfg);

// ---- suite ------------------------------------------------------------------

struct SuiteCell {
  std::string name;
  RunConfig config;
};

struct SuiteResult {
  std::string name;
  std::vector<std::uint64_t> seeds;
  std::vector<std::int64_t> steps;   // steps-to-convergence; -1 not converged, -2 failed
  int n_converged = 0;
  int n_failed = 0;
  double mean = 0.0;                 // over converged seeds
  double stddev = 0.0;               // sample std over converged seeds
};

// JSON matrix file: [{"name": "...", "overrides": {"key": value, ...}}, ...]
std::vector<SuiteCell> load_suite_matrix(const std::string& path, const RunConfig& base);

// Runs every (cell, seed) pair sequentially; per-cell failures are recorded
// and the suite continues. Writes <out_root>/suite.csv and the formatted
// table, and returns the aggregates.
std::vector<SuiteResult> run_suite(const std::vector<SuiteCell>& cells,
                                   const std::vector<std::uint64_t>& seeds,
                                   const std::string& out_root);

// Non-converged aggregates are marked "omitted".
std::string format_suite_table(const std::vector<SuiteResult>& rows);

}  // namespace uclab
