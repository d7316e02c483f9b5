#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "uclab/rng.hpp"
#include "uclab/transition.hpp"

namespace uclab {

// Complete binary tree of priority sums over `capacity` leaves. Every internal
// node is recomputed exactly as the sum of its children on update, so
// parent == left + right holds bitwise at all times.
class SumTree {
public:
  explicit SumTree(std::int64_t capacity);

  void set(std::int64_t leaf, double value);
  double value(std::int64_t leaf) const { return node_[std::size_t(base_ + leaf)]; }
  double total() const { return node_[1]; }
  std::int64_t capacity() const { return cap_; }

  // Leaf whose cumulative range contains `prefix` (in [0, total)). Empty
  // subtrees are never descended into.
  std::int64_t sample(double prefix) const;

private:
  std::int64_t cap_ = 0, base_ = 1;
  std::vector<double> node_;
};

// Same shape, max reducer; tracks the largest live raw priority.
class MaxTree {
public:
  explicit MaxTree(std::int64_t capacity);
  void set(std::int64_t leaf, double value);
  double max() const { return node_[1]; }

private:
  std::int64_t base_ = 1;
  std::vector<double> node_;
};

struct ReplayParams {
  std::int64_t capacity = 1000000;
  int her_k = 4;                 // relabel probability k/(k+1)
  double alpha = 1.0;            // priority exponent
  double beta0 = 0.3;
  std::int64_t beta_steps = 200000;
  double priority_floor = 1e-6;
  double goal_radius = 0.3;      // reward recomputation after relabeling
};

// Trajectory-structured ring buffer with prioritized sampling and hindsight
// relabeling. Whole trajectories are stored contiguously (modulo capacity) and
// evicted whole, oldest first.
class HindsightReplay {
public:
  explicit HindsightReplay(ReplayParams p);

  const ReplayParams& params() const { return params_; }
  std::int64_t size() const { return size_; }
  std::int64_t capacity() const { return params_.capacity; }

  // New transitions enter at the current maximum raw priority (1 if empty).
  void store_trajectory(const Trajectory& t);

  struct Sample {
    Batch batch;
    std::vector<float> weights;          // max-normalized IS weights
    std::vector<std::int64_t> indices;   // leaf indices for update_priorities
  };

  // n leaves by stratified prefix-sum descent; each drawn transition is
  // relabeled with probability k/(k+1) with the achieved goal of a uniformly
  // drawn strictly-later transition of its trajectory, reward and terminal
  // recomputed.
  Sample sample_batch(int n, double beta, Rng& rng);

  // Raw priorities are floored at priority_floor; tree leaves hold p^alpha.
  void update_priorities(std::span<const std::int64_t> indices,
                         std::span<const double> priorities);

  double beta_at(std::int64_t step) const;

  struct Candidate {
    Vec2 state;   // the observation where the candidate goal was achieved
    Vec2 goal;
  };
  // Uniform draws (never priority-weighted) with replacement.
  std::vector<Candidate> sample_goal_candidates(int n, Rng& rng) const;

  double max_raw_priority() const { return maxtree_.max(); }
  double total_priority() const { return tree_.total(); }
  double raw_priority(std::int64_t leaf) const { return raw_[std::size_t(leaf)]; }
  const SumTree& tree() const { return tree_; }
  bool is_live(std::int64_t leaf) const;

  void dump_csv(std::ostream& out) const;

private:
  ReplayParams params_;
  SumTree tree_;
  MaxTree maxtree_;
  std::int64_t head_ = 0;   // next write slot
  std::int64_t size_ = 0;

  // transition storage, struct-of-arrays over capacity slots
  std::vector<float> sx_, sy_, ax_, ay_, nx_, ny_, gx_, gy_, acx_, acy_, r_;
  std::vector<std::uint8_t> term_;
  std::vector<std::int32_t> idx_in_traj_, traj_len_;
  std::vector<double> raw_;

  std::int64_t tail() const;
  void evict_oldest();
  void fill_row(Batch& b, int row, std::int64_t slot) const;
};

}  // namespace uclab
