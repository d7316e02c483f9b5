#include "uclab/env.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace uclab {

MazeEnv::MazeEnv(MazeSpec spec, EnvParams params)
    : spec_(std::move(spec)), params_(params) {
  max_episode_steps_ = std::max(1, params_.episode_len_mult * spec_.min_solve_steps);
}

void MazeEnv::reset(Rng& rng) {
  const Rect& s = spec_.start_region;
  pos_ = {rng.uniform(s.x0, s.x1), rng.uniform(s.y0, s.y1)};
  const Rect& g = spec_.goal_region;
  env_goal_ = {rng.uniform(g.x0, g.x1), rng.uniform(g.y0, g.y1)};
  desired_goal_ = env_goal_;
  steps_ = 0;
}

double MazeEnv::slide_x(double dx) const {
  double nx = pos_.x + dx;
  if (dx > 0) {
    nx = std::min(nx, spec_.bounds.x1);
    for (const Rect& w : spec_.walls)
      if (pos_.y > w.y0 && pos_.y < w.y1 && pos_.x <= w.x0 && nx > w.x0) nx = w.x0;
  } else if (dx < 0) {
    nx = std::max(nx, spec_.bounds.x0);
    for (const Rect& w : spec_.walls)
      if (pos_.y > w.y0 && pos_.y < w.y1 && pos_.x >= w.x1 && nx < w.x1) nx = w.x1;
  }
  return nx;
}

double MazeEnv::slide_y(double x, double dy) const {
  double ny = pos_.y + dy;
  if (dy > 0) {
    ny = std::min(ny, spec_.bounds.y1);
    for (const Rect& w : spec_.walls)
      if (x > w.x0 && x < w.x1 && pos_.y <= w.y0 && ny > w.y0) ny = w.y0;
  } else if (dy < 0) {
    ny = std::max(ny, spec_.bounds.y0);
    for (const Rect& w : spec_.walls)
      if (x > w.x0 && x < w.x1 && pos_.y >= w.y1 && ny < w.y1) ny = w.y1;
  }
  return ny;
}

StepResult MazeEnv::step(const Vec2& action) {
  Vec2 a = action;
  if (a.x < -1.0 || a.x > 1.0 || a.y < -1.0 || a.y > 1.0) {
    ++clip_count_;
    static const bool debug = std::getenv("UCLAB_DEBUG") != nullptr;
    if (debug)
      std::fprintf(stderr, "env: clipping out-of-range action (%g, %g)\n", a.x, a.y);
    a.x = std::clamp(a.x, -1.0, 1.0);
    a.y = std::clamp(a.y, -1.0, 1.0);
  }

  const double nx = slide_x(a.x * params_.max_step);
  const double ny = slide_y(nx, a.y * params_.max_step);
  pos_ = {nx, ny};
  ++steps_;

  StepResult r;
  r.observation = pos_;
  r.achieved_goal = pos_;
  r.reward = reward_for(pos_, desired_goal_);
  r.terminal = r.reward == 0.0;
  r.truncated = steps_ >= max_episode_steps_;
  return r;
}

}  // namespace uclab
