#pragma once

#include "uclab/ensemble.hpp"
#include "uclab/geometry.hpp"
#include "uclab/nn.hpp"
#include "uclab/rng.hpp"
#include "uclab/transition.hpp"

namespace uclab {

struct ActorParams {
  int hidden = 256;
  int depth = 2;
  int obs_dim = 2;
  int act_dim = 2;
  int goal_dim = 2;
  double lr = 1e-3;
  double polyak = 0.95;
  double explore_noise = 0.2;   // Gaussian std per action component
  double p_rand = 0.3;          // probability of a fully random action
  int initial_random_steps = 1000;
};

// Deterministic policy with tanh-squashed outputs, its target copy, and the
// exploration wrapper.
class Actor {
public:
  Actor(ActorParams p, Rng& init_rng);

  const ActorParams& params() const { return params_; }

  // Train mode: uniform random during the initial warmup steps; afterwards a
  // uniform random action with probability p_rand, otherwise the policy plus
  // clipped Gaussian noise. Eval mode: the bare policy, no rng consumption.
  Vec2 act(const Vec2& s, const Vec2& g, bool train, std::int64_t env_steps, Rng& rng) const;

  // Batched policy forwards over rows [s g].
  void policy(const Mat<float>& sg, Mat<float>& out) const;
  void policy_target(const Mat<float>& sg, Mat<float>& out) const;

  // One Adam ascent step on the ensemble-mean Q of the policy's actions;
  // gradients pass through the critics into the actor only. Also
  // polyak-updates the target actor. Returns the (minimized) loss -mean Q.
  double update(const Batch& b, CriticEnsemble& ens);

  Mlp<float> net, target;
  Adam<float> opt;

private:
  ActorParams params_;
};

}  // namespace uclab
