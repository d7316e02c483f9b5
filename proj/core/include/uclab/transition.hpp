#pragma once

#include <cstdint>
#include <vector>

#include "uclab/geometry.hpp"
#include "uclab/nn.hpp"

namespace uclab {

// One environment step as stored in replay. `g` is the goal that was active
// when the action was taken (mid-episode goal changes give one trajectory
// several distinct goals).
struct Transition {
  Vec2 s;
  Vec2 a;
  Vec2 s_next;
  Vec2 g;
  Vec2 achieved_next;   // achieved goal at s_next
  float r = -1.0f;
  bool terminal = false;
};

using Trajectory = std::vector<Transition>;

// Struct-of-matrices training batch; row i across all fields is one
// (possibly hindsight-relabeled) transition.
struct Batch {
  Mat<float> s, a, s_next, g;          // n x 2 each
  std::vector<float> r;
  std::vector<std::uint8_t> terminal;

  int size() const { return s.n; }

  void resize(int n) {
    for (Mat<float>* m : {&s, &a, &s_next, &g}) {
      m->n = n;
      m->m = 2;
      m->v.resize(std::size_t(n) * 2);
    }
    r.resize(std::size_t(n));
    terminal.resize(std::size_t(n));
  }
};

}  // namespace uclab
