#include "uclab/maze.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "uclab/oracle.hpp"

namespace uclab {

const char* to_string(MazeKind k) {
  switch (k) {
    case MazeKind::square_wave: return "square-wave";
    case MazeKind::m_maze: return "m-maze";
  }
  return "?";
}

namespace {

// T = oracle step count from the farthest start-region corner to the goal
// region. Corners are nudged half a grid cell into the region: a corner flush
// against a wall face would otherwise land in a wall cell of the distance grid.
int compute_min_solve_steps(const MazeSpec& spec, double max_step, double resolution) {
  const OracleField field = geodesic_oracle(spec, spec.goal_region, resolution, max_step);
  const Rect& s = spec.start_region;
  const Vec2 mid = s.center();
  const Vec2 corners[4] = {{s.x0, s.y0}, {s.x1, s.y0}, {s.x0, s.y1}, {s.x1, s.y1}};
  int t = 0;
  for (Vec2 c : corners) {
    c.x += (mid.x > c.x ? 0.5 : -0.5) * resolution;
    c.y += (mid.y > c.y ? 0.5 : -0.5) * resolution;
    t = std::max(t, field.steps_at(c));
  }
  return t;
}

Rect scaled(const Rect& r, double u) { return {r.x0 * u, r.y0 * u, r.x1 * u, r.y1 * u}; }

}  // namespace

MazeSpec generate_square_wave(int periods, double unit, double max_step,
                              double oracle_resolution) {
  if (periods < 1) throw MazeError("square-wave maze needs periods >= 1");
  if (unit <= 0.0) throw MazeError("maze unit length must be positive");

  // Laid out on a unit grid of width 4*periods+1 and height 3. The corridor
  // runs: up the left column, right along the top, down, right along the
  // bottom, then repeats; blocker slabs fill the complement.
  MazeSpec spec;
  spec.kind = MazeKind::square_wave;
  spec.size_param = periods;
  spec.unit = unit;
  spec.corridor_width = kDefaultCorridorWidth * unit;
  const double w = 4.0 * periods + 1.0;
  spec.bounds = scaled({0, 0, w, 3}, unit);
  spec.start_region = scaled({0, 0, 1, 1}, unit);
  spec.goal_region = scaled({w - 1.0, 0, w, 1}, unit);
  for (int p = 0; p < periods; ++p) {
    const double x = 4.0 * p;
    spec.walls.push_back(scaled({x + 1, 0, x + 2, 2}, unit));  // blocks the up column
    spec.walls.push_back(scaled({x + 3, 1, x + 4, 3}, unit));  // blocks the down column
  }
  spec.walls.push_back(scaled({w - 1.0, 1, w, 3}, unit));  // cap above the goal inlet

  spec.min_solve_steps = compute_min_solve_steps(spec, max_step, oracle_resolution);
  return spec;
}

MazeSpec generate_m_maze(double length_units, double unit, double max_step,
                         double oracle_resolution) {
  if (length_units < 2.0) throw MazeError("m-maze needs length >= 2");
  if (unit <= 0.0) throw MazeError("maze unit length must be positive");

  const double L = length_units;
  const double H = std::max(3.0, std::round(5.0 * L / 12.0));

  MazeSpec spec;
  spec.kind = MazeKind::m_maze;
  spec.size_param = L;
  spec.unit = unit;
  spec.corridor_width = kDefaultCorridorWidth * unit;
  spec.bounds = scaled({0, 0, L, H}, unit);
  spec.start_region = scaled({0, 0, 1, 1}, unit);
  spec.goal_region = scaled({L - 1, 0, L, 1}, unit);

  // Two wall slabs leave a unit-wide outer corridor and a wide central
  // dead-end prong (open at the top corridor, closed at the floor).
  const double prong_w = (L - 2.0) / 2.0;
  const double px0 = 1.0 + (L - 2.0 - prong_w) / 2.0;
  const double px1 = px0 + prong_w;
  spec.walls.push_back(scaled({1, 0, px0, H - 1}, unit));
  spec.walls.push_back(scaled({px1, 0, L - 1, H - 1}, unit));

  spec.min_solve_steps = compute_min_solve_steps(spec, max_step, oracle_resolution);
  return spec;
}

void save_maze(std::ostream& os, const MazeSpec& spec) {
  os.precision(17);
  os << "uclab-maze 1\n";
  os << "kind " << to_string(spec.kind) << "\n";
  os << "size-param " << spec.size_param << "\n";
  os << "unit " << spec.unit << "\n";
  os << "corridor-width " << spec.corridor_width << "\n";
  const auto rect = [&os](const char* name, const Rect& r) {
    os << name << " " << r.x0 << " " << r.y0 << " " << r.x1 << " " << r.y1 << "\n";
  };
  rect("bounds", spec.bounds);
  rect("start", spec.start_region);
  rect("goal", spec.goal_region);
  os << "min-solve-steps " << spec.min_solve_steps << "\n";
  os << "walls " << spec.walls.size() << "\n";
  for (const Rect& w : spec.walls)
    os << w.x0 << " " << w.y0 << " " << w.x1 << " " << w.y1 << "\n";
}

MazeSpec load_maze(std::istream& is) {
  MazeSpec spec;
  std::string tag, kind;
  int version = 0;
  is >> tag >> version;
  if (!is || tag != "uclab-maze" || version != 1)
    throw MazeError("not a maze file (missing 'uclab-maze 1' header)");
  const auto expect = [&is](const char* name) {
    std::string key;
    is >> key;
    if (!is || key != name) throw MazeError(std::string("maze file: expected key ") + name);
  };
  const auto rect = [&is, &expect](const char* name) {
    expect(name);
    Rect r;
    is >> r.x0 >> r.y0 >> r.x1 >> r.y1;
    return r;
  };
  expect("kind");
  is >> kind;
  if (kind == "square-wave")
    spec.kind = MazeKind::square_wave;
  else if (kind == "m-maze")
    spec.kind = MazeKind::m_maze;
  else
    throw MazeError("maze file: unknown kind " + kind);
  expect("size-param");
  is >> spec.size_param;
  expect("unit");
  is >> spec.unit;
  expect("corridor-width");
  is >> spec.corridor_width;
  spec.bounds = rect("bounds");
  spec.start_region = rect("start");
  spec.goal_region = rect("goal");
  expect("min-solve-steps");
  is >> spec.min_solve_steps;
  expect("walls");
  std::size_t n = 0;
  is >> n;
  spec.walls.resize(n);
  for (Rect& w : spec.walls) is >> w.x0 >> w.y0 >> w.x1 >> w.y1;
  if (!is) throw MazeError("maze file: truncated");
  return spec;
}

void save_maze_file(const std::string& path, const MazeSpec& spec) {
  std::ofstream os(path);
  if (!os) throw MazeError("cannot open for write: " + path);
  save_maze(os, spec);
}

MazeSpec load_maze_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MazeError("cannot open maze file: " + path);
  return load_maze(is);
}

MazeSpec parse_maze_arg(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon != std::string::npos) {
    const std::string kind = arg.substr(0, colon);
    if (kind == "square-wave" || kind == "m-maze") {
      std::string rest = arg.substr(colon + 1);
      double param = 0.0, unit = 1.0;
      const auto colon2 = rest.find(':');
      try {
        if (colon2 != std::string::npos) {
          unit = std::stod(rest.substr(colon2 + 1));
          rest = rest.substr(0, colon2);
        }
        param = std::stod(rest);
      } catch (const std::exception&) {
        throw MazeError("bad maze argument: " + arg);
      }
      return kind == "square-wave" ? generate_square_wave(int(param), unit)
                                   : generate_m_maze(param, unit);
    }
  }
  return load_maze_file(arg);
}

}  // namespace uclab
