#include "uclab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "uclab/checkpoint.hpp"

namespace uclab {

namespace {

ReplayParams replay_params_from(const RunConfig& cfg) {
  ReplayParams p;
  p.capacity = cfg.capacity;
  p.her_k = cfg.her_k;
  // Plain hindsight replay is prioritized replay with a flat exponent: every
  // leaf holds p^0 = 1, so sampling is uniform and IS weights collapse to 1.
  p.alpha = cfg.buffer_mode == BufferMode::uniform_her ? 0.0 : cfg.per_alpha;
  p.beta0 = cfg.buffer_mode == BufferMode::uniform_her ? 1.0 : cfg.per_beta0;
  p.beta_steps = cfg.per_beta_steps;
  p.priority_floor = cfg.priority_floor;
  p.goal_radius = kDefaultGoalRadius;
  return p;
}

CriticEnsemble make_ensemble(const RunConfig& cfg, const Rng& root) {
  Rng r = root.child("init-ensemble");
  return CriticEnsemble(ensemble_params_from(cfg), r);
}

Actor make_actor(const RunConfig& cfg, const Rng& root) {
  Rng r = root.child("init-actor");
  return Actor(actor_params_from(cfg), r);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

}  // namespace

Trainer::Trainer(RunConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      maze_(parse_maze_arg(cfg_.maze)),
      env_(maze_),
      root_(cfg_.seed),
      env_rng_(root_.child("env-reset")),
      act_rng_(root_.child("action-noise")),
      target_rng_(root_.child("target-pair")),
      cand_rng_(root_.child("goal-candidates")),
      sample_rng_(root_.child("replay-sample")),
      prio_rng_(root_.child("priority-probes")),
      eval_rng_(root_.child("eval")),
      ensemble_(make_ensemble(cfg_, root_)),
      actor_(make_actor(cfg_, root_)),
      replay_(replay_params_from(cfg_)) {
  sel_.slope = cfg_.slope;
  sel_.intercept = cfg_.intercept;
  sel_.threshold_coef = cfg_.threshold_coef;
  sel_.t_max = env_.max_episode_steps();
  sel_.n_candidates = cfg_.n_candidates;
  sel_.probes = cfg_.effective_probes();
}

void Trainer::open_metrics() {
  std::filesystem::create_directories(cfg_.out_dir);
  {
    std::ofstream cj(cfg_.out_dir + "/config.json");
    cj << dump_config(cfg_) << "\n";
  }
  metrics_.open(cfg_.out_dir + "/metrics.csv", std::ios::trunc);
  metrics_ << "step,event,episode,ep_return,success_rate,critic_loss,predictive_loss,"
              "actor_loss,eps_mean,eps_min,eps_max,goal_x,goal_y,filtered,fallback,beta\n";
}

void Trainer::log_episode(double ep_return) {
  if (!metrics_.is_open()) return;
  metrics_ << env_steps_ << ",episode," << episodes_ << "," << ep_return
           << ",,,,,,,,,,,,\n";
}

void Trainer::log_select(const GoalSelection& sel) {
  if (!metrics_.is_open()) return;
  metrics_ << env_steps_ << ",select," << episodes_ << ",,,,,,"
           << sel.eps_mean << "," << sel.eps_min << "," << sel.eps_max << ","
           << sel.goal.x << "," << sel.goal.y << ","
           << sel.filtered << "," << (sel.fallback_uniform ? 1 : 0) << ",\n";
}

void Trainer::log_eval(double success, double beta) {
  if (!metrics_.is_open()) return;
  double c = acc_n_ ? acc_critic_ / double(acc_n_) : 0.0;
  double p = acc_n_ ? acc_pred_ / double(acc_n_) : 0.0;
  double a = acc_n_ ? acc_actor_ / double(acc_n_) : 0.0;
  metrics_ << env_steps_ << ",eval," << episodes_ << ",," << success << ","
           << c << "," << p << "," << a << ",,,,,,,," << beta << "\n";
  metrics_.flush();
  acc_critic_ = acc_pred_ = acc_actor_ = 0.0;
  acc_n_ = 0;
}

void Trainer::log_marker(const char* event) {
  if (!metrics_.is_open()) return;
  metrics_ << env_steps_ << "," << event << "," << episodes_ << ",,,,,,,,,,,,,\n";
  metrics_.flush();
}

bool Trainer::update_once() {
  if (replay_.size() < cfg_.batch) return false;
  HindsightReplay::Sample sample =
      replay_.sample_batch(cfg_.batch, replay_.beta_at(env_steps_), sample_rng_);
  const Batch& b = sample.batch;

  const Mlp<float>& pol = cfg_.target_actor_for_targets ? actor_.target : actor_.net;
  Targets t = ensemble_.compute_target(b, pol, target_rng_);
  std::vector<double> closs = ensemble_.critic_update(b, t, sample.weights);
  std::vector<double> ploss = ensemble_.predictive_update(b);
  double aloss = actor_.update(b, ensemble_);
  ensemble_.polyak_targets(cfg_.polyak);

  if (cfg_.buffer_mode == BufferMode::uncertainty_per) {
    const int n = b.size();
    const Mat<float>& src = cfg_.priority_on_next_state ? b.s_next : b.s;
    std::vector<Vec2> states(std::size_t(n), Vec2{});
    std::vector<Vec2> goals(std::size_t(n), Vec2{});
    for (int i = 0; i < n; ++i) {
      states[std::size_t(i)] = {src(i, 0), src(i, 1)};
      goals[std::size_t(i)] = {b.g(i, 0), b.g(i, 1)};
    }
    std::vector<double> eps =
        ensemble_.state_uncertainty_batch(states, goals, cfg_.priority_probes, prio_rng_);
    replay_.update_priorities(sample.indices, eps);
  } else if (cfg_.buffer_mode == BufferMode::td_error_per) {
    replay_.update_priorities(sample.indices, ensemble_.last_td_error());
  }

  acc_critic_ += mean_of(closs);
  acc_pred_ += mean_of(ploss);
  acc_actor_ += aloss;
  ++acc_n_;
  return true;
}

double Trainer::evaluate(int episodes) {
  double successes = 0.0;
  for (int e = 0; e < episodes; ++e) {
    MazeEnv env(maze_, env_.params());
    env.reset(eval_rng_);
    while (true) {
      Vec2 a = actor_.act(env.position(), env.desired_goal(), /*train=*/false,
                          env_steps_, eval_rng_);
      StepResult r = env.step(a);
      if (r.terminal) {
        successes += 1.0;
        break;
      }
      if (r.truncated) break;
    }
  }
  return episodes > 0 ? successes / double(episodes) : 0.0;
}

RunMetrics Trainer::train() {
  open_metrics();
  RunMetrics m;
  bool prev_perfect = false;
  bool stop = false;

  auto final_checkpoint = [&] {
    save_checkpoint(cfg_.out_dir + "/final.ckpt", ensemble_, actor_, cfg_, env_steps_);
  };

  try {
    while (!stop && env_steps_ < cfg_.step_budget) {
      env_.reset(env_rng_);
      const Vec2 g_env = env_.environment_goal();
      Vec2 g = g_env;
      if (replay_.size() >= cfg_.initial_random_steps) {
        GoalSelection sel = select_goal(replay_, ensemble_, env_.position(), g_env,
                                        /*first_of_episode=*/true, sel_, cand_rng_);
        g = sel.goal;
        log_select(sel);
      }
      env_.set_goal(g);

      Trajectory traj;
      double ep_return = 0.0;
      bool episode_done = false;
      while (!episode_done) {
        const Vec2 s = env_.position();
        const Vec2 a = actor_.act(s, g, /*train=*/true, env_steps_, act_rng_);
        StepResult res = env_.step(a);
        traj.push_back(Transition{s, a, res.observation, g, res.achieved_goal,
                                  float(res.reward), res.terminal});
        ep_return += res.reward;
        ++env_steps_;

        if (env_steps_ > cfg_.initial_random_steps && update_once()) ++updates_;

        if (env_steps_ % cfg_.eval_every == 0) {
          double success = evaluate(cfg_.eval_episodes);
          m.evals.emplace_back(env_steps_, success);
          log_eval(success, replay_.beta_at(env_steps_));
          if (success >= 1.0) {
            if (prev_perfect) {
              m.steps_to_convergence = m.evals[m.evals.size() - 2].first;
              log_marker("converged");
              stop = true;
            } else {
              prev_perfect = true;
            }
          } else {
            prev_perfect = false;
          }
        }
        if (cfg_.checkpoint_every > 0 && env_steps_ % cfg_.checkpoint_every == 0) {
          save_checkpoint(cfg_.out_dir + "/ckpt_" + std::to_string(env_steps_) + ".ckpt",
                          ensemble_, actor_, cfg_, env_steps_);
        }

        if (stop || env_steps_ >= cfg_.step_budget || res.truncated) {
          episode_done = true;
        } else if (res.terminal) {
          // Mid-episode success: hand out a fresh goal and keep rolling, once
          // the buffer can support curriculum queries.
          if (replay_.size() >= cfg_.initial_random_steps) {
            GoalSelection sel = select_goal(replay_, ensemble_, env_.position(), g_env,
                                            /*first_of_episode=*/false, sel_, cand_rng_);
            g = sel.goal;
            env_.set_goal(g);
            log_select(sel);
          } else {
            episode_done = true;
          }
        }
      }
      replay_.store_trajectory(traj);
      ++episodes_;
      log_episode(ep_return);
    }
  } catch (...) {
    final_checkpoint();
    throw;
  }

  m.env_steps = env_steps_;
  m.episodes = episodes_;
  m.updates = updates_;
  m.final_success = m.evals.empty() ? evaluate(cfg_.eval_episodes) : m.evals.back().second;
  log_marker("done");
  final_checkpoint();
  return m;
}

RunMetrics train_run(const RunConfig& cfg) {
  Trainer t(cfg);
  return t.train();
}

// ---- suite ------------------------------------------------------------------

std::vector<SuiteCell> load_suite_matrix(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open suite matrix: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("suite matrix parse error: " + std::string(e.what()));
  }
  if (!j.is_array()) throw ConfigError("suite matrix must be a JSON array");
  std::vector<SuiteCell> cells;
  for (const auto& item : j) {
    SuiteCell cell;
    cell.name = item.at("name").get<std::string>();
    cell.config = base;
    if (item.contains("overrides")) {
      for (const auto& [key, value] : item.at("overrides").items())
        apply_override(cell.config, key + "=" + value.dump());
    }
    cell.config.validate();
    cells.push_back(std::move(cell));
  }
  if (cells.empty()) throw ConfigError("suite matrix is empty");
  return cells;
}

std::vector<SuiteResult> run_suite(const std::vector<SuiteCell>& cells,
                                   const std::vector<std::uint64_t>& seeds,
                                   const std::string& out_root) {
  std::filesystem::create_directories(out_root);
  std::ofstream csv(out_root + "/suite.csv", std::ios::trunc);
  csv << "cell,seed,steps_to_convergence,converged\n";

  std::vector<SuiteResult> rows;
  for (const SuiteCell& cell : cells) {
    SuiteResult r;
    r.name = cell.name;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = cell.config;
      cfg.seed = seed;
      cfg.out_dir = out_root + "/" + cell.name + "-s" + std::to_string(seed);
      std::int64_t steps = -2;
      try {
        RunMetrics m = train_run(cfg);
        steps = m.steps_to_convergence;   // -1 when the run never converged
      } catch (const std::exception& e) {
        std::fprintf(stderr, "[suite] %s seed %llu failed: %s\n", cell.name.c_str(),
                     static_cast<unsigned long long>(seed), e.what());
        ++r.n_failed;
      }
      r.seeds.push_back(seed);
      r.steps.push_back(steps);
      if (steps >= 0) ++r.n_converged;
      csv << cell.name << "," << seed << "," << steps << "," << (steps >= 0 ? 1 : 0)
          << "\n";
      csv.flush();
    }
    std::vector<double> conv;
    for (std::int64_t s : r.steps)
      if (s >= 0) conv.push_back(double(s));
    if (!conv.empty()) {
      r.mean = std::accumulate(conv.begin(), conv.end(), 0.0) / double(conv.size());
      if (conv.size() > 1) {
        double ss = 0.0;
        for (double v : conv) ss += (v - r.mean) * (v - r.mean);
        r.stddev = std::sqrt(ss / double(conv.size() - 1));
      }
    }
    rows.push_back(std::move(r));
  }

  std::string table = format_suite_table(rows);
  std::ofstream txt(out_root + "/suite.txt", std::ios::trunc);
  txt << table;
  std::fputs(table.c_str(), stdout);
  return rows;
}

std::string format_suite_table(const std::vector<SuiteResult>& rows) {
  std::size_t name_w = 4;
  for (const SuiteResult& r : rows) name_w = std::max(name_w, r.name.size());
  std::ostringstream os;
  os << std::left;
  os.width(std::streamsize(name_w));
  os << "cell";
  os << "  converged  steps-to-convergence (mean +- std)\n";
  for (const SuiteResult& r : rows) {
    os.width(std::streamsize(name_w));
    os << r.name;
    std::ostringstream frac;
    frac << r.n_converged << "/" << r.steps.size();
    os << "  ";
    os.width(9);
    os << frac.str();
    os << "  ";
    if (r.n_converged > 0) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.1f +- %.1f", r.mean, r.stddev);
      os << buf;
    } else {
      os << "omitted";
    }
    if (r.n_failed > 0) os << "  (" << r.n_failed << " failed)";
    os << "\n";
  }
  return os.str();
}

}  // namespace uclab
