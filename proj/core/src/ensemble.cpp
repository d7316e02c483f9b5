#include "uclab/ensemble.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace uclab {

namespace {

// Param/grad array lists for the predictive optimizer. The Q head is excluded:
// the predictive loss reaches the backbone (optionally) and its own head only.
std::vector<std::vector<float>*> pred_param_arrays(EnsembleMember& m, bool into_backbone) {
  std::vector<std::vector<float>*> a;
  if (into_backbone)
    for (auto& l : m.net.hidden) {
      a.push_back(&l.W);
      a.push_back(&l.b);
    }
  a.push_back(&m.phead.W);
  a.push_back(&m.phead.b);
  return a;
}

std::vector<std::vector<float>*> pred_grad_arrays(Grads<float>& g, Linear<float>& gphead,
                                                  bool into_backbone) {
  std::vector<std::vector<float>*> a;
  if (into_backbone)
    for (auto& l : g.hidden) {
      a.push_back(&l.W);
      a.push_back(&l.b);
    }
  a.push_back(&gphead.W);
  a.push_back(&gphead.b);
  return a;
}

}  // namespace

CriticEnsemble::CriticEnsemble(EnsembleParams p, Rng& init_rng) : params_(p) {
  if (p.members < 1) throw std::invalid_argument("ensemble: members must be >= 1");
  const int in = input_dim();
  const std::vector<int> hidden(std::size_t(p.depth), p.hidden);
  members.reserve(std::size_t(p.members));
  for (int i = 0; i < p.members; ++i) {
    EnsembleMember m;
    m.net = make_mlp<float>(init_rng, in, hidden, 1, OutputAct::identity, 0.1);
    m.phead = make_linear<float>(init_rng, p.hidden, p.obs_dim, 0.1);
    m.target = m.net;
    members.push_back(std::move(m));
  }
}

Targets CriticEnsemble::compute_target(const Batch& b, const Mlp<float>& actor,
                                       Rng& rng) const {
  const int n = b.size();
  if (n == 0) throw std::invalid_argument("compute_target: empty batch");
  const int G = params_.members;

  // a' = actor(s', g)
  Mat<float> sg(n, params_.obs_dim + params_.goal_dim);
  for (int i = 0; i < n; ++i) {
    sg(i, 0) = b.s_next(i, 0);
    sg(i, 1) = b.s_next(i, 1);
    sg(i, 2) = b.g(i, 0);
    sg(i, 3) = b.g(i, 1);
  }
  FwdCache<float> acache;
  const Mat<float>& a_next = forward(actor, sg, acache);

  Mat<float> x(n, input_dim());
  for (int i = 0; i < n; ++i) {
    x(i, 0) = b.s_next(i, 0);
    x(i, 1) = b.s_next(i, 1);
    x(i, 2) = a_next(i, 0);
    x(i, 3) = a_next(i, 1);
    x(i, 4) = b.g(i, 0);
    x(i, 5) = b.g(i, 1);
  }

  Targets t;
  const double gamma = params_.gamma;
  if (params_.mode == EnsembleMode::deep_ensemble) {
    t.y = Mat<float>(n, G);
    FwdCache<float> c;
    for (int m = 0; m < G; ++m) {
      const Mat<float>& q = forward(members[std::size_t(m)].target, x, c);
      for (int i = 0; i < n; ++i)
        t.y(i, m) = float(double(b.r[std::size_t(i)]) +
                          gamma * (b.terminal[std::size_t(i)] ? 0.0 : 1.0) * double(q(i, 0)));
    }
    return t;
  }

  // joint target: min over a drawn pair of distinct members
  int p0 = 0, p1 = 0;
  if (G > 1) {
    p0 = int(rng.randint(std::uint64_t(G)));
    p1 = int(rng.randint(std::uint64_t(G - 1)));
    if (p1 >= p0) ++p1;
  }
  t.pair0 = p0;
  t.pair1 = p1;
  FwdCache<float> c0, c1;
  const Mat<float>& q0 = forward(members[std::size_t(p0)].target, x, c0);
  const Mat<float>& q1 = forward(members[std::size_t(p1)].target, x, c1);
  t.y = Mat<float>(n, 1);
  for (int i = 0; i < n; ++i) {
    const double qmin = std::min(double(q0(i, 0)), double(q1(i, 0)));
    t.y(i, 0) = float(double(b.r[std::size_t(i)]) +
                      gamma * (b.terminal[std::size_t(i)] ? 0.0 : 1.0) * qmin);
  }

  if (params_.mode == EnsembleMode::bootstrapped) {
    t.mask.resize(std::size_t(n) * G);
    for (int i = 0; i < n; ++i)
      for (int m = 0; m < G; ++m)
        t.mask[std::size_t(i) * G + m] = rng.bernoulli(params_.keep_prob) ? 1 : 0;
  }
  return t;
}

std::vector<double> CriticEnsemble::critic_update(const Batch& b, const Targets& t,
                                                  std::span<const float> is_weights) {
  const int n = b.size();
  if (n == 0) throw std::invalid_argument("critic_update: empty batch");
  if (!is_weights.empty() && int(is_weights.size()) != n)
    throw std::invalid_argument("critic_update: weight count mismatch");
  const int G = params_.members;
  const bool per_member_y = t.y.m == G && G > 1;

  Mat<float> x(n, input_dim());
  for (int i = 0; i < n; ++i) {
    x(i, 0) = b.s(i, 0);
    x(i, 1) = b.s(i, 1);
    x(i, 2) = b.a(i, 0);
    x(i, 3) = b.a(i, 1);
    x(i, 4) = b.g(i, 0);
    x(i, 5) = b.g(i, 1);
  }

  last_td_error_.assign(std::size_t(n), 0.0);
  std::vector<double> losses(std::size_t(G), 0.0);
  FwdCache<float> cache;
  Mat<float> dq(n, 1);
  std::vector<float> pflat, gflat;

  for (int m = 0; m < G; ++m) {
    EnsembleMember& mem = members[std::size_t(m)];
    const Mat<float>& q = forward(mem.net, x, cache);

    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = per_member_y ? double(t.y(i, m)) : double(t.y(i, 0));
      const double diff = double(q(i, 0)) - y;
      if (std::isfinite(diff)) last_td_error_[std::size_t(i)] += std::abs(diff) / G;
      const double w = is_weights.empty() ? 1.0 : double(is_weights[std::size_t(i)]);
      const double keep = t.mask.empty() ? 1.0 : double(t.mask[std::size_t(i) * G + m]);
      loss += w * keep * diff * diff;
      dq(i, 0) = float(2.0 * w * keep * diff / n);
    }
    loss /= n;
    losses[std::size_t(m)] = loss;
    if (!std::isfinite(loss)) {
      std::fprintf(stderr, "critic_update: member %d non-finite loss, update skipped\n", m);
      continue;
    }

    Grads<float> grads = make_grads(mem.net);
    backward<float>(mem.net, cache, dq, &grads, nullptr);
    auto parrs = param_arrays(mem.net);
    auto garrs = grad_arrays(grads);
    flat_gather(parrs, pflat);
    flat_gather(garrs, gflat);
    if (mem.q_opt.step(pflat, gflat, float(params_.critic_lr))) flat_scatter(parrs, pflat);
  }
  return losses;
}

std::vector<double> CriticEnsemble::predictive_update(const Batch& b) {
  const int n = b.size();
  if (n == 0) throw std::invalid_argument("predictive_update: empty batch");
  const int G = params_.members;
  const int C = params_.obs_dim;

  Mat<float> x(n, input_dim());
  for (int i = 0; i < n; ++i) {
    x(i, 0) = b.s(i, 0);
    x(i, 1) = b.s(i, 1);
    x(i, 2) = b.a(i, 0);
    x(i, 3) = b.a(i, 1);
    x(i, 4) = b.g(i, 0);
    x(i, 5) = b.g(i, 1);
  }

  std::vector<double> losses(std::size_t(G), 0.0);
  FwdCache<float> cache;
  Mat<float> pred, dpred(n, C), dxi;
  std::vector<float> pflat, gflat;

  for (int m = 0; m < G; ++m) {
    EnsembleMember& mem = members[std::size_t(m)];
    const Mat<float>& xi = forward_to_latent(mem.net, x, cache);
    linear_forward(mem.phead, xi, pred);

    double loss = 0.0;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < C; ++c) {
        const double diff = double(pred(i, c)) - double(b.s_next(i, c));
        loss += diff * diff;
        dpred(i, c) = float(2.0 * diff / n);
      }
    loss /= n;
    losses[std::size_t(m)] = loss;
    if (!std::isfinite(loss)) {
      std::fprintf(stderr, "predictive_update: member %d non-finite loss, update skipped\n", m);
      continue;
    }

    Linear<float> gphead;
    gphead.in = mem.phead.in;
    gphead.out = mem.phead.out;
    gphead.W.assign(mem.phead.W.size(), 0.0f);
    gphead.b.assign(mem.phead.b.size(), 0.0f);
    linear_backward_params(xi, dpred, gphead);

    Grads<float> grads = make_grads(mem.net);
    if (params_.predictive_into_backbone) {
      linear_backward_input(mem.phead, dpred, dxi);
      backward_from_latent<float>(mem.net, cache, dxi, &grads, nullptr);
    }

    auto parrs = pred_param_arrays(mem, params_.predictive_into_backbone);
    auto garrs = pred_grad_arrays(grads, gphead, params_.predictive_into_backbone);
    flat_gather(parrs, pflat);
    flat_gather(garrs, gflat);
    if (mem.p_opt.step(pflat, gflat, float(params_.predictive_lr))) flat_scatter(parrs, pflat);
  }
  return losses;
}

void CriticEnsemble::polyak_targets(double rho) {
  for (auto& m : members) polyak_update(m.target, m.net, float(rho));
}

void CriticEnsemble::assemble_inputs(std::span<const Vec2> states, std::span<const Vec2> goals,
                                     const Mat<float>& actions, int d, Mat<float>& x) const {
  const std::size_t n = std::max(states.size(), goals.size());
  x.n = int(n) * d;
  x.m = input_dim();
  x.v.resize(std::size_t(x.n) * x.m);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& s = states[states.size() == 1 ? 0 : k];
    const Vec2& g = goals[goals.size() == 1 ? 0 : k];
    for (int j = 0; j < d; ++j) {
      const int row = int(k) * d + j;
      x(row, 0) = float(s.x);
      x(row, 1) = float(s.y);
      x(row, 2) = actions(row, 0);
      x(row, 3) = actions(row, 1);
      x(row, 4) = float(g.x);
      x(row, 5) = float(g.y);
    }
  }
}

std::vector<double> CriticEnsemble::disagreement_for_probes(std::span<const Vec2> states,
                                                            std::span<const Vec2> goals,
                                                            const Mat<float>& actions,
                                                            int d) const {
  const std::size_t n = states.size();
  if (n == 0) throw std::invalid_argument("disagreement: no states");
  if (d < 1) throw std::invalid_argument("disagreement: d must be >= 1");
  if (actions.n != int(n) * d) throw std::invalid_argument("disagreement: action row mismatch");
  const int G = params_.members;
  const bool use_pred = params_.source == UncertaintySource::predictive_std;
  const int C = use_pred ? params_.obs_dim : 1;

  std::vector<double> eps(n, 0.0);
  // chunk over states so member activation caches stay modest
  const std::size_t chunk = std::max<std::size_t>(1, 16384 / std::size_t(d));
  Mat<float> x, sub_actions;
  FwdCache<float> cache;
  std::vector<Mat<float>> preds(static_cast<std::size_t>(G));

  for (std::size_t at = 0; at < n; at += chunk) {
    const std::size_t cn = std::min(chunk, n - at);
    sub_actions.n = int(cn) * d;
    sub_actions.m = 2;
    sub_actions.v.assign(actions.v.begin() + std::size_t(at) * d * 2,
                         actions.v.begin() + (std::size_t(at) + cn) * d * 2);
    const std::span<const Vec2> schunk = states.subspan(at, cn);
    const std::span<const Vec2> gchunk =
        goals.size() == 1 ? goals : goals.subspan(at, cn);
    assemble_inputs(schunk, gchunk, sub_actions, d, x);

    for (int m = 0; m < G; ++m) {
      const EnsembleMember& mem = members[std::size_t(m)];
      if (use_pred) {
        const Mat<float>& xi = forward_to_latent(mem.net, x, cache);
        linear_forward(mem.phead, xi, preds[std::size_t(m)]);
      } else {
        preds[std::size_t(m)] = forward(mem.net, x, cache);
      }
    }

    for (std::size_t k = 0; k < cn; ++k) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        const int row = int(k) * d + j;
        double row_std = 0.0;
        for (int c = 0; c < C; ++c) {
          double mean = 0.0;
          for (int m = 0; m < G; ++m) mean += double(preds[std::size_t(m)](row, c));
          mean /= G;
          double var = 0.0;
          for (int m = 0; m < G; ++m) {
            const double dv = double(preds[std::size_t(m)](row, c)) - mean;
            var += dv * dv;
          }
          row_std += std::sqrt(var / G);
        }
        acc += row_std / C;
      }
      eps[at + k] = acc / d;
    }
  }
  return eps;
}

std::vector<double> CriticEnsemble::state_uncertainty_batch(std::span<const Vec2> states,
                                                            std::span<const Vec2> goals, int d,
                                                            Rng& rng) const {
  const std::size_t n = states.size();
  if (n == 0) throw std::invalid_argument("state_uncertainty: no states");
  if (d < 1) throw std::invalid_argument("state_uncertainty: d must be >= 1");
  if (goals.size() != 1 && goals.size() != n)
    throw std::invalid_argument("state_uncertainty: goal count mismatch");

  // per state: d action draws, then (if configured) one noise draw
  Mat<float> actions(int(n) * d, 2);
  std::vector<double> noise(params_.noise_sigma > 0.0 ? n : 0);
  for (std::size_t k = 0; k < n; ++k) {
    for (int j = 0; j < d; ++j) {
      const int row = int(k) * d + j;
      actions(row, 0) = float(rng.uniform(-1.0, 1.0));
      actions(row, 1) = float(rng.uniform(-1.0, 1.0));
    }
    if (!noise.empty()) noise[k] = params_.noise_sigma * rng.normal();
  }

  std::vector<double> eps = disagreement_for_probes(states, goals, actions, d);
  for (std::size_t k = 0; k < noise.size(); ++k) eps[k] += noise[k];
  return eps;
}

double CriticEnsemble::state_uncertainty(const Vec2& s, const Vec2& g, int d, Rng& rng) const {
  const Vec2 states[1] = {s};
  const Vec2 goals[1] = {g};
  return state_uncertainty_batch(states, goals, d, rng)[0];
}

std::vector<double> CriticEnsemble::mean_q_rows(const Mat<float>& x) const {
  std::vector<double> q(std::size_t(x.n), 0.0);
  FwdCache<float> cache;
  for (const auto& mem : members) {
    const Mat<float>& qm = forward(mem.net, x, cache);
    for (int i = 0; i < x.n; ++i) q[std::size_t(i)] += double(qm(i, 0));
  }
  for (auto& v : q) v /= params_.members;
  return q;
}

std::vector<double> CriticEnsemble::mean_q_batch(const Vec2& s, std::span<const Vec2> goals,
                                                 int d, Rng& rng) const {
  const std::size_t n = goals.size();
  if (n == 0) throw std::invalid_argument("mean_q: no goals");
  if (d < 1) throw std::invalid_argument("mean_q: d must be >= 1");

  Mat<float> actions(int(n) * d, 2);
  for (std::size_t k = 0; k < n; ++k)
    for (int j = 0; j < d; ++j) {
      const int row = int(k) * d + j;
      actions(row, 0) = float(rng.uniform(-1.0, 1.0));
      actions(row, 1) = float(rng.uniform(-1.0, 1.0));
    }

  const Vec2 states[1] = {s};
  Mat<float> x;
  assemble_inputs(states, goals, actions, d, x);
  const std::vector<double> qrows = mean_q_rows(x);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += qrows[k * std::size_t(d) + j];
    out[k] = acc / d;
  }
  return out;
}

double CriticEnsemble::mean_q(const Vec2& s, const Vec2& g, int d, Rng& rng) const {
  const Vec2 goals[1] = {g};
  return mean_q_batch(s, goals, d, rng)[0];
}

}  // namespace uclab
