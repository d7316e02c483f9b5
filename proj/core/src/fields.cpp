#include "uclab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "uclab/curriculum.hpp"

namespace uclab {

namespace {

struct FreeCells {
  std::vector<std::size_t> flat;   // flat grid index per free cell
  std::vector<Vec2> centers;
};

FreeCells collect_free(const GridField& f) {
  FreeCells fc;
  for (int iy = 0; iy < f.height; ++iy)
    for (int ix = 0; ix < f.width; ++ix) {
      const std::size_t i = std::size_t(iy) * f.width + ix;
      if (!f.mask[i]) continue;
      fc.flat.push_back(i);
      fc.centers.push_back(f.cell_center(ix, iy));
    }
  return fc;
}

// raw disagreement per free cell with per-cell probe streams
std::vector<double> cell_disagreement(const CriticEnsemble& ens, const FreeCells& fc,
                                      const Vec2& g_fixed, int d, const Rng& root) {
  const std::size_t n = fc.centers.size();
  Mat<float> actions(int(n) * d, 2);
  std::vector<double> noise(ens.params().noise_sigma > 0.0 ? n : 0);
  for (std::size_t k = 0; k < n; ++k) {
    Rng cell = root.child("cell", std::uint64_t(fc.flat[k]));
    for (int j = 0; j < d; ++j) {
      const int row = int(k) * d + j;
      actions(row, 0) = float(cell.uniform(-1.0, 1.0));
      actions(row, 1) = float(cell.uniform(-1.0, 1.0));
    }
    if (!noise.empty()) noise[k] = ens.params().noise_sigma * cell.normal();
  }
  const Vec2 goals[1] = {g_fixed};
  std::vector<double> eps = ens.disagreement_for_probes(fc.centers, goals, actions, d);
  for (std::size_t k = 0; k < noise.size(); ++k) eps[k] += noise[k];
  return eps;
}

}  // namespace

Vec2 canonical_goal(const MazeSpec& maze) { return maze.goal_region.center(); }

Rect goal_point_target(const Vec2& g, double radius) {
  const double h = radius / std::sqrt(2.0);
  return Rect{g.x - h, g.y - h, g.x + h, g.y + h};
}

GridField field_value(const CriticEnsemble& ens, const Actor& actor, const MazeSpec& maze,
                      const Vec2& g_fixed, double resolution) {
  GridField f = make_grid(maze, "value", resolution);
  const FreeCells fc = collect_free(f);
  const std::size_t n = fc.centers.size();
  const std::size_t chunk = 16384;
  Mat<float> sg, a, x;
  for (std::size_t at = 0; at < n; at += chunk) {
    const std::size_t cn = std::min(chunk, n - at);
    sg.n = int(cn);
    sg.m = 4;
    sg.v.resize(cn * 4);
    for (std::size_t k = 0; k < cn; ++k) {
      const Vec2& s = fc.centers[at + k];
      sg(int(k), 0) = float(s.x);
      sg(int(k), 1) = float(s.y);
      sg(int(k), 2) = float(g_fixed.x);
      sg(int(k), 3) = float(g_fixed.y);
    }
    actor.policy(sg, a);
    x.n = int(cn);
    x.m = 6;
    x.v.resize(cn * 6);
    for (std::size_t k = 0; k < cn; ++k) {
      x(int(k), 0) = sg(int(k), 0);
      x(int(k), 1) = sg(int(k), 1);
      x(int(k), 2) = a(int(k), 0);
      x(int(k), 3) = a(int(k), 1);
      x(int(k), 4) = sg(int(k), 2);
      x(int(k), 5) = sg(int(k), 3);
    }
    const std::vector<double> q = ens.mean_q_rows(x);
    for (std::size_t k = 0; k < cn; ++k) f.values[fc.flat[at + k]] = float(q[k]);
  }
  return f;
}

GridField field_oracle_value(const MazeSpec& maze, const Vec2& g_fixed, double resolution,
                             double gamma, double goal_radius, double max_step) {
  GridField f = make_grid(maze, "oracle-value", resolution);
  const OracleField oracle =
      geodesic_oracle(maze, goal_point_target(g_fixed, goal_radius), kDefaultOracleRes,
                      max_step);
  for (int iy = 0; iy < f.height; ++iy)
    for (int ix = 0; ix < f.width; ++ix) {
      const std::size_t i = std::size_t(iy) * f.width + ix;
      if (!f.mask[i]) continue;
      f.values[i] = float(oracle.optimal_value_at(f.cell_center(ix, iy), gamma));
    }
  return f;
}

GridField field_value_error(const CriticEnsemble& ens, const Actor& actor,
                            const MazeSpec& maze, const Vec2& g_fixed, double resolution,
                            double gamma, double goal_radius, double max_step) {
  GridField v = field_value(ens, actor, maze, g_fixed, resolution);
  const GridField o =
      field_oracle_value(maze, g_fixed, resolution, gamma, goal_radius, max_step);
  v.label = "value-error";
  for (std::size_t i = 0; i < v.values.size(); ++i)
    v.values[i] = v.mask[i] ? std::fabs(v.values[i] - o.values[i]) : 0.0f;
  return v;
}

GridField field_uncertainty(const CriticEnsemble& ens, const MazeSpec& maze,
                            const Vec2& g_fixed, double resolution, int d, const Rng& root) {
  GridField f = make_grid(maze, "uncertainty", resolution);
  const FreeCells fc = collect_free(f);
  const std::vector<double> eps = cell_disagreement(ens, fc, g_fixed, d, root);
  for (std::size_t k = 0; k < fc.flat.size(); ++k) f.values[fc.flat[k]] = float(eps[k]);
  return f;
}

GoalProbabilityField field_goal_probability(const CriticEnsemble& ens, const MazeSpec& maze,
                                            const Vec2& g_fixed, double resolution,
                                            double slope, double intercept, int d,
                                            const Rng& root, int dump_n) {
  GoalProbabilityField out;
  out.field = make_grid(maze, "goal-probability", resolution);
  GridField& f = out.field;
  const FreeCells fc = collect_free(f);
  const std::vector<double> eps = cell_disagreement(ens, fc, g_fixed, d, root);

  const std::vector<double> normalized = normalize_uncertainties(eps);
  std::vector<double> probs = selection_probabilities(normalized, slope, intercept);
  bool fallback = probs.empty() || std::all_of(probs.begin(), probs.end(),
                                               [](double p) { return p == 0.0; });
  if (fallback && !fc.flat.empty()) {
    probs.assign(fc.flat.size(), 1.0 / double(fc.flat.size()));
    f.note = "uniform-fallback";
  }
  out.dump.fallback_uniform = fallback;
  for (std::size_t k = 0; k < fc.flat.size(); ++k) f.values[fc.flat[k]] = float(probs[k]);

  Rng draws = root.child("goal-draws");
  out.dump.samples.reserve(std::size_t(std::max(dump_n, 0)));
  for (int t = 0; t < dump_n && !fc.flat.empty(); ++t) {
    const double u = draws.uniform();
    double acc = 0.0;
    std::size_t pick = fc.flat.size() - 1;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) {
        pick = k;
        break;
      }
    }
    out.dump.samples.push_back(GoalSample{fc.centers[pick], eps[pick], probs[pick]});
  }
  return out;
}

void save_goal_dump(std::ostream& os, const GoalSampleDump& d) {
  os << "x,y,eps,weight\n";
  char buf[128];
  for (const GoalSample& s : d.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", s.point.x, s.point.y,
                  s.eps, s.weight);
    os << buf;
  }
}

void save_goal_dump_file(const std::string& path, const GoalSampleDump& d) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw GridError("cannot open goal dump for writing: " + path);
  save_goal_dump(os, d);
}

}  // namespace uclab
