#include "uclab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

namespace uclab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int OracleField::clamp_ix(double x) const {
  const int i = int(std::floor((x - bounds.x0) / resolution));
  return std::clamp(i, 0, nx - 1);
}

int OracleField::clamp_iy(double y) const {
  const int i = int(std::floor((y - bounds.y0) / resolution));
  return std::clamp(i, 0, ny - 1);
}

std::size_t OracleField::index_of(const Vec2& p) const {
  return std::size_t(clamp_iy(p.y)) * nx + clamp_ix(p.x);
}

double OracleField::distance_at(const Vec2& p) const { return dist[index_of(p)]; }

int OracleField::steps_at(const Vec2& p) const {
  const double d = distance_at(p);
  if (!std::isfinite(d)) return std::numeric_limits<int>::max();
  return int(std::ceil(d / max_step));
}

double OracleField::optimal_return_at(const Vec2& p) const {
  const int s = steps_at(p);
  if (s == std::numeric_limits<int>::max()) return -kInf;
  return -double(std::max(s - 1, 0));
}

double OracleField::optimal_value_at(const Vec2& p, double gamma) const {
  const int s = steps_at(p);
  if (s == std::numeric_limits<int>::max()) return -1.0 / (1.0 - gamma);
  return -(1.0 - std::pow(gamma, double(s))) / (1.0 - gamma);
}

OracleField geodesic_oracle(const MazeSpec& spec, const Rect& target,
                            double resolution, double max_step) {
  if (resolution > spec.corridor_width / 4.0)
    throw MazeError("oracle resolution must be <= corridor_width / 4");

  OracleField f;
  f.bounds = spec.bounds;
  f.resolution = resolution;
  f.max_step = max_step;
  f.nx = std::max(1, int(std::ceil(spec.bounds.width() / resolution - 1e-9)));
  f.ny = std::max(1, int(std::ceil(spec.bounds.height() / resolution - 1e-9)));
  const std::size_t n = std::size_t(f.nx) * f.ny;
  f.dist.assign(n, kInf);
  f.free_.assign(n, 0);

  for (int iy = 0; iy < f.ny; ++iy)
    for (int ix = 0; ix < f.nx; ++ix)
      f.free_[std::size_t(iy) * f.nx + ix] = spec.in_free_space(f.cell_center(ix, iy)) ? 1 : 0;

  // multi-source Dijkstra from every free cell inside the target region
  using Item = std::pair<double, std::size_t>;  // (distance, cell)
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int iy = 0; iy < f.ny; ++iy)
    for (int ix = 0; ix < f.nx; ++ix) {
      const std::size_t id = std::size_t(iy) * f.nx + ix;
      if (f.free_[id] && target.contains(f.cell_center(ix, iy))) {
        f.dist[id] = 0.0;
        heap.emplace(0.0, id);
      }
    }
  if (heap.empty()) {
    f.all_unreachable = true;
    std::fprintf(stderr, "geodesic_oracle: target region contains no free cells; "
                         "distance field is all-infinite\n");
    return f;
  }

  const double diag = resolution * std::sqrt(2.0);
  while (!heap.empty()) {
    const auto [d, id] = heap.top();
    heap.pop();
    if (d > f.dist[id]) continue;
    const int ix = int(id % f.nx), iy = int(id / f.nx);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jx >= f.nx || jy < 0 || jy >= f.ny) continue;
        const std::size_t jd = std::size_t(jy) * f.nx + jx;
        if (!f.free_[jd]) continue;
        if (dx != 0 && dy != 0) {
          // no corner cutting: both orthogonal neighbors must be free
          if (!f.free_[std::size_t(iy) * f.nx + jx] || !f.free_[std::size_t(jy) * f.nx + ix])
            continue;
        }
        const double nd = d + ((dx != 0 && dy != 0) ? diag : resolution);
        if (nd < f.dist[jd]) {
          f.dist[jd] = nd;
          heap.emplace(nd, jd);
        }
      }
  }
  return f;
}

Vec2 greedy_action(const OracleField& field, const Vec2& pos) {
  // candidate displacement per axis is bounded by max_step
  const int cx = field.clamp_ix(pos.x), cy = field.clamp_iy(pos.y);
  const int r = std::max(1, int(std::floor(field.max_step / field.resolution)));
  double best_d = field.dist[std::size_t(cy) * field.nx + cx];
  double best_norm = 0.0;
  Vec2 best = pos;
  for (int iy = std::max(0, cy - r); iy <= std::min(field.ny - 1, cy + r); ++iy)
    for (int ix = std::max(0, cx - r); ix <= std::min(field.nx - 1, cx + r); ++ix) {
      const std::size_t id = std::size_t(iy) * field.nx + ix;
      if (!field.free_[id]) continue;
      const Vec2 c = field.cell_center(ix, iy);
      if (std::abs(c.x - pos.x) > field.max_step || std::abs(c.y - pos.y) > field.max_step)
        continue;
      const double d = field.dist[id];
      const double n = distance(c, pos);
      if (d < best_d || (d == best_d && n < best_norm)) {
        best_d = d;
        best_norm = n;
        best = c;
      }
    }
  return {std::clamp((best.x - pos.x) / field.max_step, -1.0, 1.0),
          std::clamp((best.y - pos.y) / field.max_step, -1.0, 1.0)};
}

}  // namespace uclab
