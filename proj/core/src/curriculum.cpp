#include "uclab/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uclab {

std::vector<double> normalize_uncertainties(const std::vector<double>& raw) {
  if (raw.empty()) throw std::invalid_argument("normalize: empty list");
  double lo = raw[0], hi = raw[0];
  for (const double v : raw) {
    if (!std::isfinite(v)) throw std::invalid_argument("normalize: non-finite uncertainty");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<double> out(raw.size());
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  const double inv = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) * inv;
  return out;
}

std::vector<double> selection_probabilities(const std::vector<double>& normalized,
                                            double slope, double intercept) {
  std::vector<double> w(normalized.size());
  double total = 0.0;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    w[i] = std::max(slope * normalized[i] + intercept, 0.0);
    total += w[i];
  }
  if (total > 0.0)
    for (auto& v : w) v /= total;
  return w;
}

std::vector<std::size_t> achievability_filter(const std::vector<double>& mean_q,
                                              double threshold_coef, int t_max) {
  const double threshold = threshold_coef * double(t_max);
  std::vector<std::size_t> survivors;
  survivors.reserve(mean_q.size());
  for (std::size_t i = 0; i < mean_q.size(); ++i)
    if (mean_q[i] >= threshold) survivors.push_back(i);
  return survivors;
}

GoalSelection select_goal(const HindsightReplay& buffer, const CriticEnsemble& ensemble,
                          const Vec2& episode_start, const Vec2& g_env,
                          bool first_of_episode, const SelectionParams& p, Rng& rng) {
  if (buffer.size() == 0) throw std::invalid_argument("select_goal: empty buffer");

  const auto candidates = buffer.sample_goal_candidates(p.n_candidates, rng);
  std::vector<Vec2> states(candidates.size()), goals(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    states[i] = candidates[i].state;
    goals[i] = candidates[i].goal;
  }

  const Vec2 query_goal[1] = {g_env};
  const std::vector<double> raw =
      ensemble.state_uncertainty_batch(states, query_goal, p.probes, rng);

  GoalSelection sel;
  sel.candidates = int(candidates.size());
  sel.eps_min = *std::min_element(raw.begin(), raw.end());
  sel.eps_max = *std::max_element(raw.begin(), raw.end());
  for (const double v : raw) sel.eps_mean += v;
  sel.eps_mean /= double(raw.size());

  const std::vector<double> norm = normalize_uncertainties(raw);

  // achievability filter on the first goal of an episode
  std::vector<std::size_t> survivors;
  if (first_of_episode) {
    const std::vector<double> mq =
        ensemble.mean_q_batch(episode_start, goals, p.probes, rng);
    survivors = achievability_filter(mq, p.threshold_coef, p.t_max);
    sel.filtered = int(candidates.size() - survivors.size());
  } else {
    survivors.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) survivors.push_back(i);
  }

  if (survivors.empty()) {
    // everyone filtered: uniform over all candidates
    sel.fallback_uniform = true;
    sel.goal = goals[rng.randint(std::uint64_t(goals.size()))];
    return sel;
  }

  double total = 0.0;
  std::vector<double> w(survivors.size());
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    w[k] = std::max(p.slope * norm[survivors[k]] + p.intercept, 0.0);
    total += w[k];
  }

  if (total <= 0.0) {
    sel.fallback_uniform = true;
    sel.goal = goals[survivors[rng.randint(std::uint64_t(survivors.size()))]];
    return sel;
  }

  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t pick = survivors.size() - 1;
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    acc += w[k];
    if (u < acc) {
      pick = k;
      break;
    }
  }
  sel.goal = goals[survivors[pick]];
  return sel;
}

}  // namespace uclab
