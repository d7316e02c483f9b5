#pragma once

#include "uclab/maze.hpp"
#include "uclab/rng.hpp"

namespace uclab {

struct EnvParams {
  double goal_radius = kDefaultGoalRadius;
  double max_step = kDefaultMaxStep;        // displacement per action component
  int episode_len_mult = kDefaultEpisodeLenMult;
};

struct StepResult {
  Vec2 observation;
  Vec2 achieved_goal;  // == observation for this point agent
  double reward = -1.0;
  bool terminal = false;
  bool truncated = false;
};

// Continuous 2D dot agent in a maze. Sparse goal-conditioned reward: 0 within
// goal_radius of the desired goal, -1 otherwise. Movement is axis-decomposed
// sliding: the x component is applied first and stops at the first wall face it
// would cross, then the y component likewise at the new x.
class MazeEnv {
public:
  explicit MazeEnv(MazeSpec spec, EnvParams params = {});

  // Samples position uniformly in the start region and the desired goal
  // uniformly in the goal region (in that order; two uniforms each).
  void reset(Rng& rng);

  StepResult step(const Vec2& action);

  const Vec2& position() const { return pos_; }
  const Vec2& desired_goal() const { return desired_goal_; }
  // the goal sampled by reset(), unaffected by set_goal overrides
  const Vec2& environment_goal() const { return env_goal_; }
  // curriculum override of the pursued goal; reward/terminal follow it
  void set_goal(const Vec2& g) { desired_goal_ = g; }

  int steps_elapsed() const { return steps_; }
  int max_episode_steps() const { return max_episode_steps_; }
  long action_clip_count() const { return clip_count_; }

  const MazeSpec& spec() const { return spec_; }
  const EnvParams& params() const { return params_; }

  double reward_for(const Vec2& achieved, const Vec2& goal) const {
    return distance(achieved, goal) <= params_.goal_radius ? 0.0 : -1.0;
  }

private:
  double slide_x(double dx) const;
  double slide_y(double x, double dy) const;

  MazeSpec spec_;
  EnvParams params_;
  Vec2 pos_;
  Vec2 desired_goal_;
  Vec2 env_goal_;
  int steps_ = 0;
  int max_episode_steps_ = 0;
  long clip_count_ = 0;
};

}  // namespace uclab
