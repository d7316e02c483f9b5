#pragma once

#include <span>
#include <vector>

#include "uclab/config.hpp"
#include "uclab/nn.hpp"
#include "uclab/rng.hpp"
#include "uclab/transition.hpp"

namespace uclab {

struct EnsembleParams {
  int members = 3;
  int hidden = 256;
  int depth = 2;
  int obs_dim = 2;
  int act_dim = 2;
  int goal_dim = 2;
  EnsembleMode mode = EnsembleMode::joint_min_pair;
  UncertaintySource source = UncertaintySource::predictive_std;
  double noise_sigma = 0.0;
  double keep_prob = 0.8;
  double gamma = 0.99;
  double critic_lr = 2e-3;
  double predictive_lr = 5e-3;
  bool predictive_into_backbone = true;
};

// One critic: a backbone MLP whose head is the Q output, plus a predictive
// head reading the same final latent, a target copy of backbone+Q-head, and
// separate Adam accumulators for the two losses that touch the backbone.
struct EnsembleMember {
  Mlp<float> net;        // obs+act+goal -> hidden... -> 1
  Linear<float> phead;   // latent -> predicted next observation
  Mlp<float> target;
  Adam<float> q_opt;     // critic loss, over net
  Adam<float> p_opt;     // predictive loss, over (net.hidden +) phead
};

// Targets for one batch. In deep-ensemble mode y has one column per member;
// otherwise a single shared column. Bootstrapped mode adds row-major n x G
// Bernoulli keep masks applied inside the critic loss.
struct Targets {
  Mat<float> y;
  std::vector<std::uint8_t> mask;
  int pair0 = 0, pair1 = 0;   // drawn index pair (min-target modes)
};

class CriticEnsemble {
public:
  CriticEnsemble(EnsembleParams p, Rng& init_rng);

  const EnsembleParams& params() const { return params_; }
  int input_dim() const { return params_.obs_dim + params_.act_dim + params_.goal_dim; }

  // y = r + gamma * (1 - terminal) * min_{i in M} Q_target,i(s', a', g) with
  // a' from `actor` evaluated at (s', g). Per-member targets (no min) in
  // deep-ensemble mode; Bernoulli keep masks drawn here in bootstrapped mode.
  Targets compute_target(const Batch& b, const Mlp<float>& actor, Rng& rng) const;

  // One Adam step per member on the weighted squared TD error. `is_weights`
  // multiplies per-transition losses (pass {} for unweighted). Returns
  // per-member losses; members with non-finite loss are skipped with a
  // diagnostic. Also records |Q - y| averaged over members per transition.
  std::vector<double> critic_update(const Batch& b, const Targets& t,
                                    std::span<const float> is_weights);

  // One Adam step per member on mean squared next-observation error of the
  // predictive head (gradients reach the backbone unless configured off).
  std::vector<double> predictive_update(const Batch& b);

  void polyak_targets(double rho);

  // Disagreement among member predictions for one state, probed at d random
  // actions: per action, population std across members per component,
  // averaged over components; then averaged over the d actions. Configured
  // Gaussian noise (if any) is added to the raw result.
  double state_uncertainty(const Vec2& s, const Vec2& g, int d, Rng& rng) const;

  // Batched equivalent; bitwise-identical to mapping state_uncertainty over
  // `states` with the same rng. `goals` holds either one shared goal or one
  // goal per state.
  std::vector<double> state_uncertainty_batch(std::span<const Vec2> states,
                                              std::span<const Vec2> goals, int d,
                                              Rng& rng) const;

  // Noise-free disagreement given externally drawn probe actions (d rows per
  // state, laid out state-major). Exposed for field computations that need
  // per-cell rng streams.
  std::vector<double> disagreement_for_probes(std::span<const Vec2> states,
                                              std::span<const Vec2> goals,
                                              const Mat<float>& actions, int d) const;

  // Mean of Q_i(s, a_j, g) over members and d random actions.
  double mean_q(const Vec2& s, const Vec2& g, int d, Rng& rng) const;
  std::vector<double> mean_q_batch(const Vec2& s, std::span<const Vec2> goals, int d,
                                   Rng& rng) const;

  // Mean over members of Q_i at explicit (s, a, g) rows.
  std::vector<double> mean_q_rows(const Mat<float>& x) const;

  // |Q - y| per transition of the last critic_update, averaged over members.
  const std::vector<double>& last_td_error() const { return last_td_error_; }

  std::vector<EnsembleMember> members;

private:
  EnsembleParams params_;
  std::vector<double> last_td_error_;

  void assemble_inputs(std::span<const Vec2> states, std::span<const Vec2> goals,
                       const Mat<float>& actions, int d, Mat<float>& x) const;
};

}  // namespace uclab
