#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "uclab/geometry.hpp"

namespace uclab {

// Shared kinematic defaults. The maze sizes are in "units"; these constants fix
// the scale of the agent relative to a unit-wide corridor and are overridable
// through the run configuration.
inline constexpr double kDefaultCorridorWidth = 1.0;
inline constexpr double kDefaultGoalRadius = 0.3;
inline constexpr double kDefaultMaxStep = 0.5;   // per action component
inline constexpr double kDefaultOracleRes = 0.05;
inline constexpr int kDefaultEpisodeLenMult = 4;  // max_episode_steps = mult * T

enum class MazeKind { square_wave, m_maze };

const char* to_string(MazeKind k);

// Wall geometry, start/goal regions, and the minimum solve time of one maze.
// Free space is everything inside `bounds` not strictly inside a wall.
struct MazeSpec {
  MazeKind kind = MazeKind::square_wave;
  double size_param = 1.0;     // periods (square-wave) or corridor length (m-maze)
  double unit = 1.0;           // world length of one maze unit
  double corridor_width = kDefaultCorridorWidth;
  std::vector<Rect> walls;
  Rect bounds;
  Rect start_region;
  Rect goal_region;
  int min_solve_steps = 0;     // T: oracle step count, farthest start corner -> goal region

  bool in_wall(const Vec2& p) const {
    for (const Rect& w : walls)
      if (w.contains_strict(p)) return true;
    return false;
  }
  bool in_free_space(const Vec2& p) const { return bounds.contains(p) && !in_wall(p); }
};

struct MazeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Serpentine single-route corridor with `periods` full square-wave cycles,
// corridor width 1 unit, overall height 3 units, width 4*periods+1 units.
// Start region is the leftmost bottom unit square, goal region the rightmost.
MazeSpec generate_square_wave(int periods, double unit = 1.0,
                              double max_step = kDefaultMaxStep,
                              double oracle_resolution = kDefaultOracleRes);

// M-shaped maze: outer corridor (left column, top row, right column) of width
// 1 unit plus a wide central dead-end prong hanging from the top corridor down
// to the floor. Start region is the bottom-left inlet, goal region the
// bottom-right inlet. Height = max(3, round(5*length/12)), matching a 12x5
// outline at length 12 and 4x3 at length 4.
MazeSpec generate_m_maze(double length_units, double unit = 1.0,
                         double max_step = kDefaultMaxStep,
                         double oracle_resolution = kDefaultOracleRes);

// Structured text round-trip for maze specs.
void save_maze(std::ostream& os, const MazeSpec& spec);
MazeSpec load_maze(std::istream& is);
void save_maze_file(const std::string& path, const MazeSpec& spec);
MazeSpec load_maze_file(const std::string& path);

// Parses "square-wave:<periods>[:unit]", "m-maze:<length>[:unit]", or a path
// to a saved maze file.
MazeSpec parse_maze_arg(const std::string& arg);

}  // namespace uclab
