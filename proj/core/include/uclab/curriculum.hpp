#pragma once

#include <vector>

#include "uclab/ensemble.hpp"
#include "uclab/geometry.hpp"
#include "uclab/replay.hpp"
#include "uclab/rng.hpp"

namespace uclab {

struct SelectionParams {
  double slope = 626.0;        // m
  double intercept = -591.0;   // b
  double threshold_coef = -1.6;
  int t_max = 0;               // maximum rollout length for the threshold
  int n_candidates = 1000;
  int probes = 8;              // d for uncertainty and mean-Q queries
};

// (eps - min) / (max - min); an all-equal list maps to all 0.5. Rejects
// non-finite input.
std::vector<double> normalize_uncertainties(const std::vector<double>& raw);

// max(m*eps + b, 0) per candidate, normalized to sum to 1. All-zero weights
// return an all-zero vector (callers fall back to uniform).
std::vector<double> selection_probabilities(const std::vector<double>& normalized,
                                            double slope, double intercept);

// Indices whose mean Q clears threshold_coef * t_max (goals judged reachable
// within the episode's step budget).
std::vector<std::size_t> achievability_filter(const std::vector<double>& mean_q,
                                              double threshold_coef, int t_max);

struct GoalSelection {
  Vec2 goal;
  int candidates = 0;
  int filtered = 0;        // dropped by the achievability threshold
  double eps_mean = 0.0;   // raw-uncertainty summary over candidates
  double eps_min = 0.0;
  double eps_max = 0.0;
  bool fallback_uniform = false;
};

// Draws candidate goals from the buffer, scores them by ensemble disagreement
// queried with the environment's desired goal, normalizes, optionally applies
// the mean-Q achievability filter (first goal of an episode only, threshold
// c * t_max evaluated at the episode's start state), then samples by the
// linear weighting. Falls back to uniform over survivors when every weight is
// zero, and to uniform over all candidates when the filter removes everyone.
// Throws on an empty buffer: the caller uses g_env directly.
GoalSelection select_goal(const HindsightReplay& buffer, const CriticEnsemble& ensemble,
                          const Vec2& episode_start, const Vec2& g_env,
                          bool first_of_episode, const SelectionParams& p, Rng& rng);

}  // namespace uclab
