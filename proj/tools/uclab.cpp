#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "uclab/checkpoint.hpp"
#include "uclab/fields.hpp"
#include "uclab/trainer.hpp"

using namespace uclab;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::size_t at = 0;
  while (at < csv.size()) {
    std::size_t comma = csv.find(',', at);
    if (comma == std::string::npos) comma = csv.size();
    const std::string tok = csv.substr(at, comma - at);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
    at = comma + 1;
  }
  if (seeds.empty()) throw ConfigError("--seeds needs at least one seed");
  return seeds;
}

double run_eval(const Actor& actor, const MazeSpec& maze, int episodes, Rng& rng) {
  double ok = 0.0;
  for (int e = 0; e < episodes; ++e) {
    MazeEnv env(maze);
    env.reset(rng);
    while (true) {
      StepResult r = env.step(actor.act(env.position(), env.desired_goal(),
                                        /*train=*/false, 0, rng));
      if (r.terminal) {
        ok += 1.0;
        break;
      }
      if (r.truncated) break;
    }
  }
  return episodes > 0 ? ok / episodes : 0.0;
}

int cmd_train(const std::string& config_path, std::int64_t seed,
              const std::vector<std::string>& overrides) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (seed >= 0) cfg.seed = std::uint64_t(seed);
  for (const std::string& kv : overrides) apply_override(cfg, kv);
  cfg.validate();
  RunMetrics m = train_run(cfg);
  std::printf("steps %lld\nepisodes %lld\nupdates %lld\n", (long long)m.env_steps,
              (long long)m.episodes, (long long)m.updates);
  if (m.converged())
    std::printf("converged_at %lld\n", (long long)m.steps_to_convergence);
  else
    std::printf("converged_at -\n");
  std::printf("final_success %.4f\n", m.final_success);
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& maze_arg, int episodes,
             std::int64_t seed) {
  LoadedCheckpoint lc = load_checkpoint(ckpt);
  MazeSpec maze = parse_maze_arg(maze_arg.empty() ? lc.config.maze : maze_arg);
  Rng root(seed >= 0 ? std::uint64_t(seed) : lc.config.seed);
  Rng eval_rng = root.child("eval");
  const double rate = run_eval(lc.actor, maze, episodes, eval_rng);
  std::printf("success_rate %.4f\n", rate);
  return 0;
}

int cmd_suite(const std::string& matrix, const std::string& config_path,
              const std::string& seeds_csv, const std::string& out_root) {
  RunConfig base = config_path.empty() ? RunConfig{} : load_config(config_path);
  const std::vector<SuiteCell> cells = load_suite_matrix(matrix, base);
  run_suite(cells, parse_seeds(seeds_csv), out_root);
  return 0;
}

int cmd_heatmap(const std::string& ckpt, const std::string& maze_arg,
                const std::string& what, const std::string& out, double res, int d,
                std::int64_t seed, double gamma) {
  if (what == "oracle") {
    if (maze_arg.empty()) throw ConfigError("heatmap --what oracle needs --maze");
    MazeSpec maze = parse_maze_arg(maze_arg);
    save_grid_file(out, field_oracle_value(maze, canonical_goal(maze), res, gamma));
    return 0;
  }
  if (ckpt.empty()) throw ConfigError("heatmap --what " + what + " needs --checkpoint");
  LoadedCheckpoint lc = load_checkpoint(ckpt);
  MazeSpec maze = parse_maze_arg(maze_arg.empty() ? lc.config.maze : maze_arg);
  const Vec2 g = canonical_goal(maze);
  const int probes = d > 0 ? d : lc.config.effective_probes();
  Rng root(seed >= 0 ? std::uint64_t(seed) : 0);
  GridField f;
  if (what == "value") {
    f = field_value(lc.ensemble, lc.actor, maze, g, res);
  } else if (what == "error") {
    f = field_value_error(lc.ensemble, lc.actor, maze, g, res, lc.config.gamma);
  } else if (what == "uncertainty") {
    f = field_uncertainty(lc.ensemble, maze, g, res, probes, root);
  } else if (what == "goalprob") {
    f = field_goal_probability(lc.ensemble, maze, g, res, lc.config.slope,
                               lc.config.intercept, probes, root)
            .field;
  } else {
    throw ConfigError("unknown --what: " + what);
  }
  save_grid_file(out, f);
  return 0;
}

int cmd_dump_goals(const std::string& ckpt, const std::string& maze_arg, int n,
                   const std::string& out, double res, int d, std::int64_t seed) {
  LoadedCheckpoint lc = load_checkpoint(ckpt);
  MazeSpec maze = parse_maze_arg(maze_arg.empty() ? lc.config.maze : maze_arg);
  const int probes = d > 0 ? d : lc.config.effective_probes();
  Rng root(seed >= 0 ? std::uint64_t(seed) : 0);
  GoalProbabilityField gp =
      field_goal_probability(lc.ensemble, maze, canonical_goal(maze), res,
                             lc.config.slope, lc.config.intercept, probes, root, n);
  save_goal_dump_file(out, gp.dump);
  if (gp.dump.fallback_uniform) std::printf("note uniform-fallback\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uclab: maze RL laboratory (training, evaluation, heatmap analysis)"};
  app.require_subcommand(1);

  // train
  std::string config_path, maze_arg, ckpt, out, what, matrix, seeds_csv = "1,2,3";
  std::string out_root = "runs/suite";
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  int episodes = 100, d = -1, dump_n = 200;
  double res = 0.1, gamma = 0.99;

  CLI::App* train = app.add_subcommand("train", "run one training session");
  train->add_option("--config", config_path, "JSON run configuration");
  train->add_option("--seed", seed, "seed override");
  train->add_option("--override", overrides, "key=value config override (repeatable)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint's policy");
  eval->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  eval->add_option("--maze", maze_arg, "maze (default: the checkpoint's)");
  eval->add_option("--episodes", episodes, "evaluation episodes");
  eval->add_option("--seed", seed, "evaluation seed (default: checkpoint seed)");

  CLI::App* suite = app.add_subcommand("suite", "run a config-matrix suite");
  suite->add_option("--matrix", matrix, "JSON cell matrix")->required();
  suite->add_option("--config", config_path, "base JSON configuration");
  suite->add_option("--seeds", seeds_csv, "comma-separated seeds");
  suite->add_option("--out", out_root, "suite output root");

  CLI::App* heatmap = app.add_subcommand("heatmap", "emit a scalar field grid file");
  heatmap->add_option("--checkpoint", ckpt, "checkpoint file");
  heatmap->add_option("--maze", maze_arg, "maze (default: the checkpoint's)");
  heatmap->add_option("--what", what, "value|error|uncertainty|goalprob|oracle")
      ->required()
      ->check(CLI::IsMember({"value", "error", "uncertainty", "goalprob", "oracle"}));
  heatmap->add_option("--out", out, "output grid file")->required();
  heatmap->add_option("--res", res, "cell size");
  heatmap->add_option("--d", d, "probe actions per cell");
  heatmap->add_option("--seed", seed, "probe rng seed (default 0)");
  heatmap->add_option("--gamma", gamma, "discount for --what oracle");

  CLI::App* dump = app.add_subcommand("dump-goals", "sample goals from the curriculum field");
  dump->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  dump->add_option("--maze", maze_arg, "maze (default: the checkpoint's)");
  dump->add_option("--n", dump_n, "number of goals");
  dump->add_option("--out", out, "output CSV")->required();
  dump->add_option("--res", res, "cell size");
  dump->add_option("--d", d, "probe actions per cell");
  dump->add_option("--seed", seed, "probe rng seed (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;   // help exits 0, parse errors exit 2
  }

  try {
    if (*train) return cmd_train(config_path, seed, overrides);
    if (*eval) return cmd_eval(ckpt, maze_arg, episodes, seed);
    if (*suite) return cmd_suite(matrix, config_path, seeds_csv, out_root);
    if (*heatmap) return cmd_heatmap(ckpt, maze_arg, what, out, res, d, seed, gamma);
    if (*dump) return cmd_dump_goals(ckpt, maze_arg, dump_n, out, res, d, seed);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const MazeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const GridError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
