#pragma once

#include <cstdint>
#include <vector>

#include "uclab/maze.hpp"

namespace uclab {

// Geodesic distance field through maze free space: 8-connected Dijkstra over a
// uniform grid, axis moves cost `resolution`, diagonal moves resolution*sqrt(2),
// diagonals never cut wall corners. Distances are to a target set of cells (a
// rectangle region); wall cells and unreachable cells hold infinity.
struct OracleField {
  Rect bounds;
  double resolution = kDefaultOracleRes;
  double max_step = kDefaultMaxStep;
  int nx = 0, ny = 0;
  std::vector<double> dist;          // row-major, iy * nx + ix
  std::vector<std::uint8_t> free_;   // 1 = cell center in free space
  bool all_unreachable = false;      // diagnostic: target fully walled

  int clamp_ix(double x) const;
  int clamp_iy(double y) const;
  std::size_t index_of(const Vec2& p) const;
  Vec2 cell_center(int ix, int iy) const {
    return {bounds.x0 + (ix + 0.5) * resolution, bounds.y0 + (iy + 0.5) * resolution};
  }

  double distance_at(const Vec2& p) const;
  // minimum actions to reach the target: ceil(distance / max_step)
  int steps_at(const Vec2& p) const;
  // undiscounted optimal return: -(steps - 1), clamped to 0 for states already
  // inside the target set
  double optimal_return_at(const Vec2& p) const;
  // discounted optimal value: -(1 - gamma^steps) / (1 - gamma)
  double optimal_value_at(const Vec2& p, double gamma) const;
};

OracleField geodesic_oracle(const MazeSpec& spec, const Rect& target,
                            double resolution = kDefaultOracleRes,
                            double max_step = kDefaultMaxStep);

// Scripted navigation used by tests and evaluation sanity checks: the action
// (in [-1,1]^2) that moves toward the reachable cell with the smallest oracle
// distance within one step's range of `pos`.
Vec2 greedy_action(const OracleField& field, const Vec2& pos);

}  // namespace uclab
