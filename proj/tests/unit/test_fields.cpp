#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "uclab/fields.hpp"

using namespace uclab;

namespace {

EnsembleParams ens_params(int members, double sigma = 0.0) {
  EnsembleParams p;
  p.members = members;
  p.hidden = 8;
  p.depth = 2;
  p.noise_sigma = sigma;
  return p;
}

ActorParams actor_params() {
  ActorParams p;
  p.hidden = 8;
  p.depth = 2;
  return p;
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("the canonical goal is the goal region's center") {
  const MazeSpec spec = generate_m_maze(4);
  const Vec2 g = canonical_goal(spec);
  CHECK(g.x == 3.5);
  CHECK(g.y == 0.5);
}

TEST_CASE("the point-goal target is the inscribed square of the goal ball") {
  const Vec2 g{3.5, 0.5};
  const Rect r = goal_point_target(g, 0.3);
  const double h = 0.3 / std::sqrt(2.0);
  CHECK(r.x0 == doctest::Approx(3.5 - h));
  CHECK(r.x1 == doctest::Approx(3.5 + h));
  CHECK(r.y0 == doctest::Approx(0.5 - h));
  CHECK(r.y1 == doctest::Approx(0.5 + h));
  // every corner of the square touches the ball boundary
  CHECK(distance({r.x0, r.y0}, g) == doctest::Approx(0.3));
  CHECK(distance({r.x1, r.y1}, g) == doctest::Approx(0.3));
}

TEST_CASE("all field kinds share dimensions and mask at one resolution") {
  const MazeSpec spec = generate_m_maze(4);
  Rng einit(401), ainit(402);
  CriticEnsemble ens(ens_params(3), einit);
  Actor actor(actor_params(), ainit);
  const Vec2 g = canonical_goal(spec);
  const double res = 0.25;
  Rng root(5);

  const GridField val = field_value(ens, actor, spec, g, res);
  const GridField ora = field_oracle_value(spec, g, res, 0.99);
  const GridField err = field_value_error(ens, actor, spec, g, res, 0.99);
  const GridField unc = field_uncertainty(ens, spec, g, res, 4, root);
  const GoalProbabilityField gp =
      field_goal_probability(ens, spec, g, res, 626.0, -591.0, 4, root, 20);

  CHECK(val.label == "value");
  CHECK(ora.label == "oracle-value");
  CHECK(err.label == "value-error");
  CHECK(unc.label == "uncertainty");
  CHECK(gp.field.label == "goal-probability");
  for (const GridField* f : {&ora, &err, &unc, &gp.field}) {
    CHECK(f->width == val.width);
    CHECK(f->height == val.height);
    CHECK(f->mask == val.mask);
    CHECK(f->resolution == res);
  }
}

TEST_CASE("oracle values follow the discounted-step formula") {
  const MazeSpec spec = generate_m_maze(4);
  const Vec2 g = canonical_goal(spec);
  const double res = 0.25;
  const GridField f = field_oracle_value(spec, g, res, 0.99);

  const OracleField oracle = geodesic_oracle(spec, goal_point_target(g, kDefaultGoalRadius));
  for (int iy = 0; iy < f.height; ++iy)
    for (int ix = 0; ix < f.width; ++ix) {
      if (f.masked(ix, iy)) continue;
      const int s = oracle.steps_at(f.cell_center(ix, iy));
      REQUIRE(s != std::numeric_limits<int>::max());
      const double want = -(1.0 - std::pow(0.99, double(s))) / (1.0 - 0.99);
      CHECK(double(f.at(ix, iy)) == doctest::Approx(want).epsilon(1e-6));
    }

  // spot anchors: a cell inside the goal ball is worth 0, the far start
  // column sits behind both prongs and is deeply discounted
  CHECK(f.at(14, 1) == 0.0f);          // center (3.625, 0.375), within 0.3 of g
  CHECK(f.at(0, 0) < -9.0f);           // center (0.125, 0.125), >= 10 steps out
}

TEST_CASE("value fields average the critics at the policy's actions") {
  const MazeSpec spec = generate_m_maze(4);
  Rng einit(403), ainit(404);
  CriticEnsemble ens(ens_params(3), einit);
  Actor actor(actor_params(), ainit);
  const Vec2 g = canonical_goal(spec);
  const GridField f = field_value(ens, actor, spec, g, 0.25);

  int checked = 0;
  for (int iy = 0; iy < f.height && checked < 5; ++iy)
    for (int ix = 0; ix < f.width && checked < 5; ++ix) {
      if (f.masked(ix, iy)) continue;
      const Vec2 s = f.cell_center(ix, iy);
      Mat<float> sg(1, 4);
      sg(0, 0) = float(s.x);
      sg(0, 1) = float(s.y);
      sg(0, 2) = float(g.x);
      sg(0, 3) = float(g.y);
      Mat<float> a;
      actor.policy(sg, a);
      Mat<float> x(1, 6);
      x(0, 0) = float(s.x);
      x(0, 1) = float(s.y);
      x(0, 2) = a(0, 0);
      x(0, 3) = a(0, 1);
      x(0, 4) = float(g.x);
      x(0, 5) = float(g.y);
      CHECK(double(f.at(ix, iy)) == doctest::Approx(ens.mean_q_rows(x)[0]).epsilon(1e-5));
      ++checked;
    }
  CHECK(checked == 5);
}

TEST_CASE("value error is the absolute gap to the oracle") {
  const MazeSpec spec = generate_m_maze(4);
  Rng einit(405), ainit(406);
  CriticEnsemble ens(ens_params(3), einit);
  Actor actor(actor_params(), ainit);
  const Vec2 g = canonical_goal(spec);
  const double res = 0.25;
  const GridField val = field_value(ens, actor, spec, g, res);
  const GridField ora = field_oracle_value(spec, g, res, 0.99);
  const GridField err = field_value_error(ens, actor, spec, g, res, 0.99);
  for (std::size_t i = 0; i < err.values.size(); ++i) {
    if (!err.mask[i]) continue;
    CHECK(double(err.values[i]) ==
          doctest::Approx(std::fabs(double(val.values[i]) - double(ora.values[i])))
              .epsilon(1e-5));
    CHECK(err.values[i] >= 0.0f);
  }
}

TEST_CASE("uncertainty fields are reproducible and zero for a lone quiet member") {
  const MazeSpec spec = generate_m_maze(4);
  const Vec2 g = canonical_goal(spec);
  Rng einit(407);
  CriticEnsemble ens(ens_params(3), einit);
  Rng root(9);
  const GridField a = field_uncertainty(ens, spec, g, 0.25, 4, root);
  const GridField b = field_uncertainty(ens, spec, g, 0.25, 4, root);
  CHECK(a.values == b.values);

  Rng sinit(408);
  CriticEnsemble solo(ens_params(1), sinit);
  const GridField z = field_uncertainty(solo, spec, g, 0.25, 4, root);
  for (std::size_t i = 0; i < z.values.size(); ++i)
    if (z.mask[i]) CHECK(z.values[i] == 0.0f);
}

TEST_CASE("each cell owns a named child stream for probes and noise") {
  const MazeSpec spec = generate_m_maze(4);
  const Vec2 g = canonical_goal(spec);
  Rng sinit(409);
  CriticEnsemble noisy(ens_params(1, 0.5), sinit);  // disagreement 0 + sigma noise
  Rng root(11);
  const int d = 4;
  const GridField f = field_uncertainty(noisy, spec, g, 0.25, d, root);

  // cell (0,0) is free space; replay its stream: d action pairs, then noise
  REQUIRE(!f.masked(0, 0));
  Rng cell = root.child("cell", 0);
  for (int i = 0; i < 2 * d; ++i) cell.uniform(-1.0, 1.0);
  CHECK(f.at(0, 0) == float(0.5 * cell.normal()));

  // a different free cell draws from its own stream, not a shared cursor
  const int flat = 1;  // (1, 0) is also inside the start square
  REQUIRE(!f.masked(1, 0));
  Rng cell1 = root.child("cell", flat);
  for (int i = 0; i < 2 * d; ++i) cell1.uniform(-1.0, 1.0);
  CHECK(f.at(1, 0) == float(0.5 * cell1.normal()));
}

TEST_CASE("goal probabilities sum to one and mirror the uncertainty field") {
  const MazeSpec spec = generate_m_maze(4);
  const Vec2 g = canonical_goal(spec);
  Rng einit(410);
  CriticEnsemble ens(ens_params(3), einit);
  Rng root(13);
  const double res = 0.25;
  const int d = 4;
  const GoalProbabilityField gp =
      field_goal_probability(ens, spec, g, res, 626.0, -591.0, d, root, 50);

  double sum = 0.0;
  for (std::size_t i = 0; i < gp.field.values.size(); ++i) {
    if (!gp.field.mask[i]) continue;
    CHECK(gp.field.values[i] >= 0.0f);
    sum += double(gp.field.values[i]);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

  // dumped samples carry the raw disagreement of their cell, which matches the
  // uncertainty field drawn from the same root
  const GridField unc = field_uncertainty(ens, spec, g, res, d, root);
  REQUIRE(gp.dump.samples.size() == 50);
  for (const GoalSample& s : gp.dump.samples) {
    const int ix = int((s.point.x - spec.bounds.x0) / res);
    const int iy = int((s.point.y - spec.bounds.y0) / res);
    REQUIRE(!unc.masked(ix, iy));
    CHECK(float(s.eps) == unc.at(ix, iy));
    CHECK(s.weight >= 0.0);
  }
  CHECK(!gp.dump.fallback_uniform);
  CHECK(gp.field.note.empty());

  // same root, same field, same draws
  const GoalProbabilityField again =
      field_goal_probability(ens, spec, g, res, 626.0, -591.0, d, root, 50);
  CHECK(again.field.values == gp.field.values);
  REQUIRE(again.dump.samples.size() == gp.dump.samples.size());
  for (std::size_t i = 0; i < gp.dump.samples.size(); ++i) {
    CHECK(again.dump.samples[i].point.x == gp.dump.samples[i].point.x);
    CHECK(again.dump.samples[i].point.y == gp.dump.samples[i].point.y);
  }
}

TEST_CASE("flat disagreement falls back to uniform goal probabilities") {
  const MazeSpec spec = generate_m_maze(4);
  const Vec2 g = canonical_goal(spec);
  Rng sinit(411);
  CriticEnsemble solo(ens_params(1), sinit);
  Rng root(15);
  const GoalProbabilityField gp =
      field_goal_probability(solo, spec, g, 0.25, 626.0, -591.0, 4, root, 30);
  CHECK(gp.dump.fallback_uniform);
  CHECK(gp.field.note == "uniform-fallback");

  int free_cells = 0;
  for (const auto m : gp.field.mask) free_cells += m;
  REQUIRE(free_cells > 0);
  const float want = float(1.0 / free_cells);
  for (std::size_t i = 0; i < gp.field.values.size(); ++i)
    if (gp.field.mask[i])
      CHECK(gp.field.values[i] == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("goal dumps serialize as csv") {
  GoalSampleDump d;
  d.samples.push_back({{1.25, 0.75}, 0.5, 0.002});
  d.samples.push_back({{2.0, 1.0}, 0.25, 0.001});
  std::ostringstream os;
  save_goal_dump(os, d);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,y,eps,weight");
  std::getline(is, line);
  CHECK(line.substr(0, 5) == "1.25,");
  std::getline(is, line);
  CHECK(line.substr(0, 2) == "2,");
  CHECK(std::getline(is, line).eof());
}

}  // TEST_SUITE
