#include "uclab/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace uclab {

Actor::Actor(ActorParams p, Rng& init_rng) : params_(p) {
  const std::vector<int> hidden(std::size_t(p.depth), p.hidden);
  net = make_mlp<float>(init_rng, p.obs_dim + p.goal_dim, hidden, p.act_dim,
                        OutputAct::tanh_bounded, 0.1);
  target = net;
}

Vec2 Actor::act(const Vec2& s, const Vec2& g, bool train, std::int64_t env_steps,
                Rng& rng) const {
  if (train && env_steps < params_.initial_random_steps)
    return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  if (train && rng.bernoulli(params_.p_rand))
    return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

  Mat<float> sg(1, params_.obs_dim + params_.goal_dim);
  sg(0, 0) = float(s.x);
  sg(0, 1) = float(s.y);
  sg(0, 2) = float(g.x);
  sg(0, 3) = float(g.y);
  FwdCache<float> cache;
  const Mat<float>& a = forward(net, sg, cache);
  Vec2 out{double(a(0, 0)), double(a(0, 1))};
  if (train) {
    out.x = std::clamp(out.x + params_.explore_noise * rng.normal(), -1.0, 1.0);
    out.y = std::clamp(out.y + params_.explore_noise * rng.normal(), -1.0, 1.0);
  }
  return out;
}

void Actor::policy(const Mat<float>& sg, Mat<float>& out) const {
  FwdCache<float> cache;
  out = forward(net, sg, cache);
}

void Actor::policy_target(const Mat<float>& sg, Mat<float>& out) const {
  FwdCache<float> cache;
  out = forward(target, sg, cache);
}

double Actor::update(const Batch& b, CriticEnsemble& ens) {
  const int n = b.size();
  if (n == 0) throw std::invalid_argument("actor update: empty batch");
  const int G = int(ens.members.size());

  Mat<float> sg(n, params_.obs_dim + params_.goal_dim);
  for (int i = 0; i < n; ++i) {
    sg(i, 0) = b.s(i, 0);
    sg(i, 1) = b.s(i, 1);
    sg(i, 2) = b.g(i, 0);
    sg(i, 3) = b.g(i, 1);
  }
  FwdCache<float> acache;
  const Mat<float>& a_pi = forward(net, sg, acache);

  Mat<float> x(n, ens.input_dim());
  for (int i = 0; i < n; ++i) {
    x(i, 0) = b.s(i, 0);
    x(i, 1) = b.s(i, 1);
    x(i, 2) = a_pi(i, 0);
    x(i, 3) = a_pi(i, 1);
    x(i, 4) = b.g(i, 0);
    x(i, 5) = b.g(i, 1);
  }

  // ascend mean_i mean_batch Q_i: dQ/dA accumulated over members, critics
  // themselves untouched
  double loss = 0.0;
  Mat<float> da(n, params_.act_dim);
  std::fill(da.v.begin(), da.v.end(), 0.0f);
  Mat<float> dq(n, 1);
  const float dqv = float(-1.0 / (double(n) * G));
  std::fill(dq.v.begin(), dq.v.end(), dqv);
  FwdCache<float> ccache;
  Mat<float> dx;
  for (int m = 0; m < G; ++m) {
    const Mat<float>& q = forward(ens.members[std::size_t(m)].net, x, ccache);
    for (int i = 0; i < n; ++i) loss -= double(q(i, 0));
    backward<float>(ens.members[std::size_t(m)].net, ccache, dq, nullptr, &dx);
    for (int i = 0; i < n; ++i) {
      da(i, 0) += dx(i, 2);
      da(i, 1) += dx(i, 3);
    }
  }
  loss /= double(n) * G;
  if (!std::isfinite(loss)) {
    std::fprintf(stderr, "actor update: non-finite loss, update skipped\n");
    return loss;
  }

  Grads<float> grads = make_grads(net);
  backward<float>(net, acache, da, &grads, nullptr);
  auto parrs = param_arrays(net);
  auto garrs = grad_arrays(grads);
  std::vector<float> pflat, gflat;
  flat_gather(parrs, pflat);
  flat_gather(garrs, gflat);
  if (opt.step(pflat, gflat, float(params_.lr))) flat_scatter(parrs, pflat);

  polyak_update(target, net, float(params_.polyak));
  return loss;
}

}  // namespace uclab
