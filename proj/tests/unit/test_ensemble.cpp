#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "uclab/ensemble.hpp"

using namespace uclab;

namespace {

EnsembleParams small_params() {
  EnsembleParams p;
  p.members = 3;
  p.hidden = 8;
  p.depth = 2;
  return p;
}

Batch random_batch(int n, Rng& rng) {
  Batch b;
  b.resize(n);
  for (int i = 0; i < n; ++i) {
    b.s(i, 0) = float(rng.uniform(0, 4));
    b.s(i, 1) = float(rng.uniform(0, 3));
    b.a(i, 0) = float(rng.uniform(-1, 1));
    b.a(i, 1) = float(rng.uniform(-1, 1));
    b.s_next(i, 0) = float(rng.uniform(0, 4));
    b.s_next(i, 1) = float(rng.uniform(0, 3));
    b.g(i, 0) = float(rng.uniform(0, 4));
    b.g(i, 1) = float(rng.uniform(0, 3));
    const bool term = rng.bernoulli(0.25);
    b.r[std::size_t(i)] = term ? 0.0f : -1.0f;
    b.terminal[std::size_t(i)] = term ? 1 : 0;
  }
  return b;
}

Mlp<float> small_actor(unsigned seed) {
  Rng rng(seed);
  return make_mlp<float>(rng, 4, {8, 8}, 2, OutputAct::tanh_bounded);
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("min-pair targets bootstrap through the drawn target pair") {
  Rng init(101);
  CriticEnsemble ens(small_params(), init);
  Mlp<float> actor = small_actor(7);
  Rng brng(3);
  const Batch b = random_batch(8, brng);
  Rng trng(11);
  const Targets t = ens.compute_target(b, actor, trng);

  REQUIRE(t.y.n == 8);
  REQUIRE(t.y.m == 1);
  CHECK(t.mask.empty());
  CHECK(t.pair0 != t.pair1);
  CHECK(t.pair0 >= 0);
  CHECK(t.pair0 < 3);
  CHECK(t.pair1 >= 0);
  CHECK(t.pair1 < 3);

  // recompute y through the same forward pass the library uses
  Mat<float> sg(8, 4);
  for (int i = 0; i < 8; ++i) {
    sg(i, 0) = b.s_next(i, 0);
    sg(i, 1) = b.s_next(i, 1);
    sg(i, 2) = b.g(i, 0);
    sg(i, 3) = b.g(i, 1);
  }
  FwdCache<float> ac;
  const Mat<float>& an = forward(actor, sg, ac);
  Mat<float> x(8, 6);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = b.s_next(i, 0);
    x(i, 1) = b.s_next(i, 1);
    x(i, 2) = an(i, 0);
    x(i, 3) = an(i, 1);
    x(i, 4) = b.g(i, 0);
    x(i, 5) = b.g(i, 1);
  }
  FwdCache<float> c0, c1;
  const Mat<float> q0 = forward(ens.members[std::size_t(t.pair0)].target, x, c0);
  const Mat<float> q1 = forward(ens.members[std::size_t(t.pair1)].target, x, c1);
  for (int i = 0; i < 8; ++i) {
    const double qmin = std::min(double(q0(i, 0)), double(q1(i, 0)));
    const double want =
        double(b.r[std::size_t(i)]) + 0.99 * (b.terminal[std::size_t(i)] ? 0.0 : 1.0) * qmin;
    CHECK(double(t.y(i, 0)) == doctest::Approx(want).epsilon(1e-6));
    if (b.terminal[std::size_t(i)]) CHECK(t.y(i, 0) == b.r[std::size_t(i)]);
  }
}

TEST_CASE("pair draws cover all distinct pairs and a lone member pairs with itself") {
  Rng init(102);
  CriticEnsemble ens(small_params(), init);
  Mlp<float> actor = small_actor(8);
  Rng brng(4);
  const Batch b = random_batch(2, brng);
  Rng trng(12);
  int seen[3][3] = {};
  for (int k = 0; k < 300; ++k) {
    const Targets t = ens.compute_target(b, actor, trng);
    ++seen[t.pair0][t.pair1];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) CHECK(seen[i][j] == 0);
      else CHECK(seen[i][j] > 10);  // each ordered pair ~50 expected
    }

  EnsembleParams p1 = small_params();
  p1.members = 1;
  Rng init1(103);
  CriticEnsemble solo(p1, init1);
  Rng t1(13);
  const Targets ts = solo.compute_target(b, actor, t1);
  CHECK(ts.pair0 == 0);
  CHECK(ts.pair1 == 0);
  // a single member draws no pair, so the stream stays untouched
  Rng fresh(13);
  CHECK(t1.uniform(0, 1) == fresh.uniform(0, 1));
}

TEST_CASE("deep-ensemble targets are per member with no shared minimum") {
  EnsembleParams p = small_params();
  p.mode = EnsembleMode::deep_ensemble;
  Rng init(104);
  CriticEnsemble ens(p, init);
  Mlp<float> actor = small_actor(9);
  Rng brng(5);
  const Batch b = random_batch(6, brng);
  Rng trng(14);
  const Targets t = ens.compute_target(b, actor, trng);
  REQUIRE(t.y.n == 6);
  REQUIRE(t.y.m == 3);
  CHECK(t.mask.empty());
  // no randomness consumed in this mode
  Rng fresh(14);
  CHECK(trng.uniform(0, 1) == fresh.uniform(0, 1));

  Mat<float> sg(6, 4);
  for (int i = 0; i < 6; ++i) {
    sg(i, 0) = b.s_next(i, 0);
    sg(i, 1) = b.s_next(i, 1);
    sg(i, 2) = b.g(i, 0);
    sg(i, 3) = b.g(i, 1);
  }
  FwdCache<float> ac;
  const Mat<float>& an = forward(actor, sg, ac);
  Mat<float> x(6, 6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = b.s_next(i, 0);
    x(i, 1) = b.s_next(i, 1);
    x(i, 2) = an(i, 0);
    x(i, 3) = an(i, 1);
    x(i, 4) = b.g(i, 0);
    x(i, 5) = b.g(i, 1);
  }
  for (int m = 0; m < 3; ++m) {
    FwdCache<float> c;
    const Mat<float>& q = forward(ens.members[std::size_t(m)].target, x, c);
    for (int i = 0; i < 6; ++i) {
      const double want =
          double(b.r[std::size_t(i)]) + 0.99 * (b.terminal[std::size_t(i)] ? 0.0 : 1.0) * double(q(i, 0));
      CHECK(double(t.y(i, m)) == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("bootstrapped mode draws keep masks at keep_prob") {
  EnsembleParams p = small_params();
  p.mode = EnsembleMode::bootstrapped;
  p.keep_prob = 0.8;
  Rng init(105);
  CriticEnsemble ens(p, init);
  Mlp<float> actor = small_actor(10);
  Rng brng(6);
  const Batch b = random_batch(3000, brng);
  Rng trng(15);
  const Targets t = ens.compute_target(b, actor, trng);
  REQUIRE(t.y.m == 1);  // shared min-pair target plus masks
  REQUIRE(t.mask.size() == std::size_t(3000) * 3);
  double kept = 0;
  for (const auto m : t.mask) kept += m;
  CHECK(kept / double(t.mask.size()) == doctest::Approx(0.8).epsilon(0.025));
}

TEST_CASE("critic update with zero weights is a no-op on parameters") {
  Rng init(106);
  CriticEnsemble ens(small_params(), init);
  Mlp<float> actor = small_actor(11);
  Rng brng(7);
  const Batch b = random_batch(16, brng);
  Rng trng(16);
  const Targets t = ens.compute_target(b, actor, trng);

  std::vector<float> before, after;
  flat_gather(param_arrays(ens.members[0].net), before);
  const std::vector<float> zeros(16, 0.0f);
  const std::vector<double> losses = ens.critic_update(b, t, zeros);
  for (const double l : losses) CHECK(l == 0.0);
  flat_gather(param_arrays(ens.members[0].net), after);
  CHECK(before == after);
}

TEST_CASE("critic update reports the pre-step loss and mean absolute error") {
  Rng init(107);
  CriticEnsemble ens(small_params(), init);
  Mlp<float> actor = small_actor(12);
  Rng brng(8);
  const Batch b = random_batch(32, brng);
  Rng trng(17);
  const Targets t = ens.compute_target(b, actor, trng);

  // independent pre-update loss from the public Q evaluation
  Mat<float> x(32, 6);
  for (int i = 0; i < 32; ++i) {
    x(i, 0) = b.s(i, 0);
    x(i, 1) = b.s(i, 1);
    x(i, 2) = b.a(i, 0);
    x(i, 3) = b.a(i, 1);
    x(i, 4) = b.g(i, 0);
    x(i, 5) = b.g(i, 1);
  }
  std::vector<double> want_loss(3, 0.0);
  std::vector<double> want_td(32, 0.0);
  for (int m = 0; m < 3; ++m) {
    FwdCache<float> c;
    const Mat<float>& q = forward(ens.members[std::size_t(m)].net, x, c);
    for (int i = 0; i < 32; ++i) {
      const double diff = double(q(i, 0)) - double(t.y(i, 0));
      want_loss[std::size_t(m)] += diff * diff;
      want_td[std::size_t(i)] += std::fabs(diff) / 3.0;
    }
    want_loss[std::size_t(m)] /= 32.0;
  }

  const std::vector<double> losses = ens.critic_update(b, t, {});
  REQUIRE(losses.size() == 3);
  for (int m = 0; m < 3; ++m)
    CHECK(losses[std::size_t(m)] == doctest::Approx(want_loss[std::size_t(m)]).epsilon(1e-9));
  REQUIRE(ens.last_td_error().size() == 32);
  for (int i = 0; i < 32; ++i)
    CHECK(ens.last_td_error()[std::size_t(i)] ==
          doctest::Approx(want_td[std::size_t(i)]).epsilon(1e-9));
}

TEST_CASE("repeated critic and predictive updates reduce their losses") {
  Rng init(108);
  CriticEnsemble ens(small_params(), init);
  Mlp<float> actor = small_actor(13);
  Rng brng(9);
  const Batch b = random_batch(64, brng);
  Rng trng(18);
  const Targets t = ens.compute_target(b, actor, trng);

  const std::vector<double> c_first = ens.critic_update(b, t, {});
  const std::vector<double> p_first = ens.predictive_update(b);
  std::vector<double> c_last, p_last;
  for (int k = 0; k < 150; ++k) {
    c_last = ens.critic_update(b, t, {});
    p_last = ens.predictive_update(b);
  }
  for (int m = 0; m < 3; ++m) {
    CHECK(c_last[std::size_t(m)] < c_first[std::size_t(m)]);
    CHECK(p_last[std::size_t(m)] < p_first[std::size_t(m)]);
    CHECK(p_first[std::size_t(m)] > 0.0);
  }
}

TEST_CASE("polyak_targets moves targets toward online nets") {
  Rng init(109);
  CriticEnsemble ens(small_params(), init);
  Mlp<float> actor = small_actor(14);
  Rng brng(10);
  const Batch b = random_batch(32, brng);
  Rng trng(19);
  const Targets t = ens.compute_target(b, actor, trng);
  for (int k = 0; k < 20; ++k) ens.critic_update(b, t, {});

  std::vector<float> online, target_before, target_after;
  flat_gather(param_arrays(ens.members[0].net), online);
  flat_gather(param_arrays(ens.members[0].target), target_before);
  ens.polyak_targets(0.95);
  flat_gather(param_arrays(ens.members[0].target), target_after);
  for (std::size_t i = 0; i < online.size(); ++i)
    CHECK(target_after[i] ==
          doctest::Approx(0.95f * target_before[i] + 0.05f * online[i]).epsilon(1e-5));
}

TEST_CASE("a lone member has zero disagreement and additive noise") {
  EnsembleParams p = small_params();
  p.members = 1;
  Rng init(110);
  CriticEnsemble ens(p, init);
  const Vec2 s{1.5, 2.5}, g{3.5, 0.5};
  const int d = 8;

  Rng r1(21);
  CHECK(ens.state_uncertainty(s, g, d, r1) == 0.0);
  // exactly d action pairs were drawn: the next value lines up with a replay
  Rng replay(21);
  for (int i = 0; i < 2 * d; ++i) replay.uniform(-1.0, 1.0);
  CHECK(r1.uniform(0, 1) == replay.uniform(0, 1));

  EnsembleParams pn = p;
  pn.noise_sigma = 0.5;
  Rng init2(110);
  CriticEnsemble noisy(pn, init2);
  Rng r2(22);
  const double u = noisy.state_uncertainty(s, g, d, r2);
  Rng replay2(22);
  for (int i = 0; i < 2 * d; ++i) replay2.uniform(-1.0, 1.0);
  CHECK(u == 0.5 * replay2.normal());
}

TEST_CASE("batched uncertainty matches the scalar mapping bitwise") {
  Rng init(111);
  CriticEnsemble ens(small_params(), init);
  const std::vector<Vec2> states = {{0.5, 0.5}, {1.0, 2.0}, {3.2, 0.4}, {2.5, 2.5}, {0.1, 1.9}};
  const Vec2 g{3.5, 0.5};
  const int d = 8;

  Rng r_scalar(33);
  std::vector<double> want;
  for (const Vec2& s : states) want.push_back(ens.state_uncertainty(s, g, d, r_scalar));

  Rng r_batch(33);
  const std::vector<Vec2> shared_goal = {g};
  const std::vector<double> got = ens.state_uncertainty_batch(states, shared_goal, d, r_batch);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("mean_q_rows averages member critics") {
  Rng init(112);
  CriticEnsemble ens(small_params(), init);
  Mat<float> x(4, 6);
  Rng rng(44);
  for (auto& v : x.v) v = float(rng.uniform(-1, 3));
  const std::vector<double> got = ens.mean_q_rows(x);
  for (int i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (int m = 0; m < 3; ++m) {
      FwdCache<float> c;
      acc += double(forward(ens.members[std::size_t(m)].net, x, c)(i, 0));
    }
    CHECK(got[std::size_t(i)] == doctest::Approx(acc / 3.0).epsilon(1e-12));
  }
}

}  // TEST_SUITE
