#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "uclab/agent.hpp"
#include "uclab/ensemble.hpp"
#include "uclab/gridfield.hpp"
#include "uclab/oracle.hpp"

namespace uclab {

// Heatmaps are drawn for the environment's canonical goal: the center of the
// maze's goal region.
Vec2 canonical_goal(const MazeSpec& maze);

// Largest axis-aligned square inside the ball of `radius` around g — the
// rectangle target handed to the geodesic oracle when the goal is a point
// rather than a region.
Rect goal_point_target(const Vec2& g, double radius);

// Mean critic value per free cell center s: (1/G) sum_i Q_i(s, pi(s, g), g).
GridField field_value(const CriticEnsemble& ens, const Actor& actor, const MazeSpec& maze,
                      const Vec2& g_fixed, double resolution);

// Discounted optimal value -(1 - gamma^steps)/(1 - gamma) per free cell, steps
// from the geodesic oracle aimed at g_fixed's goal ball.
GridField field_oracle_value(const MazeSpec& maze, const Vec2& g_fixed, double resolution,
                             double gamma, double goal_radius = kDefaultGoalRadius,
                             double max_step = kDefaultMaxStep);

// |field_value - field_oracle_value| per free cell.
GridField field_value_error(const CriticEnsemble& ens, const Actor& actor,
                            const MazeSpec& maze, const Vec2& g_fixed, double resolution,
                            double gamma, double goal_radius = kDefaultGoalRadius,
                            double max_step = kDefaultMaxStep);

// Ensemble disagreement per free cell, d probe actions each. Every cell draws
// its probes (and its noise term, when the ensemble is configured with one)
// from its own stream root.child("cell", flat_index), so the field is
// independent of evaluation order and reproducible cell-by-cell.
GridField field_uncertainty(const CriticEnsemble& ens, const MazeSpec& maze,
                            const Vec2& g_fixed, double resolution, int d, const Rng& root);

struct GoalSample {
  Vec2 point;
  double eps = 0.0;     // raw disagreement at the sampled cell
  double weight = 0.0;  // its selection probability
};

struct GoalSampleDump {
  std::vector<GoalSample> samples;
  bool fallback_uniform = false;
};

struct GoalProbabilityField {
  GridField field;
  GoalSampleDump dump;
};

// Treats every free cell center as a candidate goal: disagreement as in
// field_uncertainty (same per-cell streams, so the two fields agree exactly
// for the same root), min-max normalized, linearly weighted by
// max(slope * n + intercept, 0), normalized to sum 1 over free cells. An
// all-zero weighting falls back to the uniform distribution and flags the
// field's note. `dump_n` goals are then drawn from the distribution via
// root.child("goal-draws").
GoalProbabilityField field_goal_probability(const CriticEnsemble& ens, const MazeSpec& maze,
                                            const Vec2& g_fixed, double resolution,
                                            double slope, double intercept, int d,
                                            const Rng& root, int dump_n = 200);

// CSV: x,y,eps,weight with one header line.
void save_goal_dump(std::ostream& os, const GoalSampleDump& d);
void save_goal_dump_file(const std::string& path, const GoalSampleDump& d);

}  // namespace uclab
