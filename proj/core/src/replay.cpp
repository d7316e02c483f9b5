#include "uclab/replay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace uclab {

namespace {
std::int64_t pow2_at_least(std::int64_t n) {
  std::int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace

SumTree::SumTree(std::int64_t capacity) : cap_(capacity) {
  if (capacity < 1) throw std::invalid_argument("SumTree: capacity must be >= 1");
  base_ = pow2_at_least(capacity);
  node_.assign(std::size_t(2 * base_), 0.0);
}

void SumTree::set(std::int64_t leaf, double value) {
  std::int64_t i = base_ + leaf;
  node_[std::size_t(i)] = value;
  for (i >>= 1; i >= 1; i >>= 1)
    node_[std::size_t(i)] = node_[std::size_t(2 * i)] + node_[std::size_t(2 * i + 1)];
}

std::int64_t SumTree::sample(double prefix) const {
  std::int64_t i = 1;
  while (i < base_) {
    const double left = node_[std::size_t(2 * i)];
    if (prefix < left || node_[std::size_t(2 * i + 1)] <= 0.0) {
      i = 2 * i;
    } else {
      prefix -= left;
      i = 2 * i + 1;
    }
  }
  return i - base_;
}

MaxTree::MaxTree(std::int64_t capacity) {
  base_ = pow2_at_least(std::max<std::int64_t>(1, capacity));
  node_.assign(std::size_t(2 * base_), 0.0);
}

void MaxTree::set(std::int64_t leaf, double value) {
  std::int64_t i = base_ + leaf;
  node_[std::size_t(i)] = value;
  for (i >>= 1; i >= 1; i >>= 1)
    node_[std::size_t(i)] = std::max(node_[std::size_t(2 * i)], node_[std::size_t(2 * i + 1)]);
}

HindsightReplay::HindsightReplay(ReplayParams p)
    : params_(p), tree_(p.capacity), maxtree_(p.capacity) {
  const std::size_t c = std::size_t(p.capacity);
  for (auto* v : {&sx_, &sy_, &ax_, &ay_, &nx_, &ny_, &gx_, &gy_, &acx_, &acy_, &r_})
    v->assign(c, 0.0f);
  term_.assign(c, 0);
  idx_in_traj_.assign(c, 0);
  traj_len_.assign(c, 0);
  raw_.assign(c, 0.0);
}

std::int64_t HindsightReplay::tail() const {
  return ((head_ - size_) % params_.capacity + params_.capacity) % params_.capacity;
}

bool HindsightReplay::is_live(std::int64_t leaf) const {
  if (leaf < 0 || leaf >= params_.capacity) return false;
  const std::int64_t off = ((leaf - tail()) % params_.capacity + params_.capacity) % params_.capacity;
  return off < size_;
}

void HindsightReplay::evict_oldest() {
  const std::int64_t t = tail();
  const std::int64_t len = traj_len_[std::size_t(t)];
  for (std::int64_t i = 0; i < len; ++i) {
    const std::int64_t slot = (t + i) % params_.capacity;
    tree_.set(slot, 0.0);
    maxtree_.set(slot, 0.0);
    raw_[std::size_t(slot)] = 0.0;
  }
  size_ -= len;
}

void HindsightReplay::store_trajectory(const Trajectory& t) {
  const std::int64_t len = std::int64_t(t.size());
  if (len == 0) throw std::invalid_argument("store_trajectory: empty trajectory");
  if (len > params_.capacity)
    throw std::invalid_argument("store_trajectory: trajectory exceeds capacity");
  while (size_ + len > params_.capacity) evict_oldest();

  const double init_p = size_ == 0 ? 1.0 : std::max(maxtree_.max(), params_.priority_floor);
  for (std::int64_t i = 0; i < len; ++i) {
    const std::int64_t slot = (head_ + i) % params_.capacity;
    const Transition& tr = t[std::size_t(i)];
    sx_[std::size_t(slot)] = float(tr.s.x);
    sy_[std::size_t(slot)] = float(tr.s.y);
    ax_[std::size_t(slot)] = float(tr.a.x);
    ay_[std::size_t(slot)] = float(tr.a.y);
    nx_[std::size_t(slot)] = float(tr.s_next.x);
    ny_[std::size_t(slot)] = float(tr.s_next.y);
    gx_[std::size_t(slot)] = float(tr.g.x);
    gy_[std::size_t(slot)] = float(tr.g.y);
    acx_[std::size_t(slot)] = float(tr.achieved_next.x);
    acy_[std::size_t(slot)] = float(tr.achieved_next.y);
    r_[std::size_t(slot)] = tr.r;
    term_[std::size_t(slot)] = tr.terminal ? 1 : 0;
    idx_in_traj_[std::size_t(slot)] = std::int32_t(i);
    traj_len_[std::size_t(slot)] = std::int32_t(len);
    raw_[std::size_t(slot)] = init_p;
    tree_.set(slot, std::pow(init_p, params_.alpha));
    maxtree_.set(slot, init_p);
  }
  head_ = (head_ + len) % params_.capacity;
  size_ += len;
}

void HindsightReplay::fill_row(Batch& b, int row, std::int64_t slot) const {
  const std::size_t s = std::size_t(slot);
  b.s(row, 0) = sx_[s];
  b.s(row, 1) = sy_[s];
  b.a(row, 0) = ax_[s];
  b.a(row, 1) = ay_[s];
  b.s_next(row, 0) = nx_[s];
  b.s_next(row, 1) = ny_[s];
  b.g(row, 0) = gx_[s];
  b.g(row, 1) = gy_[s];
  b.r[std::size_t(row)] = r_[s];
  b.terminal[std::size_t(row)] = term_[s];
}

HindsightReplay::Sample HindsightReplay::sample_batch(int n, double beta, Rng& rng) {
  if (n <= 0) throw std::invalid_argument("sample_batch: n must be positive");
  if (size_ < n) throw std::invalid_argument("sample_batch: buffer under-filled");

  Sample out;
  out.batch.resize(n);
  out.weights.resize(std::size_t(n));
  out.indices.resize(std::size_t(n));

  const double total = tree_.total();
  const double relabel_p = params_.her_k > 0
                               ? double(params_.her_k) / double(params_.her_k + 1)
                               : 0.0;
  std::vector<double> probs(std::size_t(n), 0.0);

  for (int j = 0; j < n; ++j) {
    // stratified draw within the j-th segment of the prefix range
    double u = total * ((j + rng.uniform()) / n);
    u = std::min(u, std::nextafter(total, 0.0));
    const std::int64_t slot = tree_.sample(u);
    out.indices[std::size_t(j)] = slot;
    probs[std::size_t(j)] = tree_.value(slot) / total;
    fill_row(out.batch, j, slot);

    const std::int32_t idx = idx_in_traj_[std::size_t(slot)];
    const std::int32_t len = traj_len_[std::size_t(slot)];
    if (relabel_p > 0.0 && rng.bernoulli(relabel_p) && idx + 1 < len) {
      const std::int64_t ahead = 1 + std::int64_t(rng.randint(std::uint64_t(len - idx - 1)));
      const std::int64_t fslot = (slot + ahead) % params_.capacity;
      const float ngx = acx_[std::size_t(fslot)];
      const float ngy = acy_[std::size_t(fslot)];
      out.batch.g(j, 0) = ngx;
      out.batch.g(j, 1) = ngy;
      const double dx = double(acx_[std::size_t(slot)]) - double(ngx);
      const double dy = double(acy_[std::size_t(slot)]) - double(ngy);
      const bool hit = std::sqrt(dx * dx + dy * dy) <= params_.goal_radius;
      out.batch.r[std::size_t(j)] = hit ? 0.0f : -1.0f;
      out.batch.terminal[std::size_t(j)] = hit ? 1 : 0;
    }
  }

  // w = (N * P)^-beta, normalized by the batch max
  double wmax = 0.0;
  std::vector<double> w(std::size_t(n), 0.0);
  for (int j = 0; j < n; ++j) {
    w[std::size_t(j)] = std::pow(double(size_) * probs[std::size_t(j)], -beta);
    wmax = std::max(wmax, w[std::size_t(j)]);
  }
  for (int j = 0; j < n; ++j)
    out.weights[std::size_t(j)] = float(wmax > 0.0 ? w[std::size_t(j)] / wmax : 1.0);
  return out;
}

void HindsightReplay::update_priorities(std::span<const std::int64_t> indices,
                                        std::span<const double> priorities) {
  if (indices.size() != priorities.size())
    throw std::invalid_argument("update_priorities: size mismatch");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::int64_t slot = indices[k];
    if (!is_live(slot)) throw std::invalid_argument("update_priorities: dead index");
    const double raw = std::max(priorities[k], params_.priority_floor);
    raw_[std::size_t(slot)] = raw;
    tree_.set(slot, std::pow(raw, params_.alpha));
    maxtree_.set(slot, raw);
  }
}

double HindsightReplay::beta_at(std::int64_t step) const {
  if (step < 0) throw std::invalid_argument("beta_at: negative step");
  const double f = std::min(1.0, double(step) / double(params_.beta_steps));
  return params_.beta0 + (1.0 - params_.beta0) * f;
}

std::vector<HindsightReplay::Candidate> HindsightReplay::sample_goal_candidates(
    int n, Rng& rng) const {
  if (size_ == 0) throw std::invalid_argument("sample_goal_candidates: empty buffer");
  std::vector<Candidate> out;
  out.reserve(std::size_t(n));
  const std::int64_t t = tail();
  for (int i = 0; i < n; ++i) {
    const std::int64_t slot = (t + std::int64_t(rng.randint(std::uint64_t(size_)))) % params_.capacity;
    out.push_back({{double(nx_[std::size_t(slot)]), double(ny_[std::size_t(slot)])},
                   {double(acx_[std::size_t(slot)]), double(acy_[std::size_t(slot)])}});
  }
  return out;
}

void HindsightReplay::dump_csv(std::ostream& out) const {
  out << "slot,traj_idx,traj_len,s_x,s_y,a_x,a_y,next_x,next_y,goal_x,goal_y,"
         "achieved_x,achieved_y,reward,terminal,priority\n";
  const std::int64_t t = tail();
  for (std::int64_t i = 0; i < size_; ++i) {
    const std::int64_t slot = (t + i) % params_.capacity;
    const std::size_t s = std::size_t(slot);
    out << slot << ',' << idx_in_traj_[s] << ',' << traj_len_[s] << ',' << sx_[s] << ','
        << sy_[s] << ',' << ax_[s] << ',' << ay_[s] << ',' << nx_[s] << ',' << ny_[s] << ','
        << gx_[s] << ',' << gy_[s] << ',' << acx_[s] << ',' << acy_[s] << ',' << r_[s] << ','
        << int(term_[s]) << ',' << raw_[s] << '\n';
  }
}

}  // namespace uclab
