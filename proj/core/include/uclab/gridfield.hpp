#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "uclab/maze.hpp"

namespace uclab {

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scalar field sampled at cell centers of a uniform grid over a maze's
// bounds. Row-major with row 0 at the bottom edge (y = bounds.y0); wall cells
// are masked and carry no data. Serialized as a short self-describing text
// header followed by raw little-endian float32 values and a bit-packed mask,
// round-tripping bitwise.
struct GridField {
  std::string label;   // value | value-error | uncertainty | goal-probability | oracle-value
  Rect bounds;
  double resolution = 0.0;
  int width = 0, height = 0;
  std::vector<float> values;        // iy * width + ix
  std::vector<std::uint8_t> mask;   // 1 = data cell, 0 = masked (wall)
  std::string note;                 // optional single-line flag, e.g. "uniform-fallback"

  std::size_t cells() const { return std::size_t(width) * std::size_t(height); }
  float& at(int ix, int iy) { return values[std::size_t(iy) * width + ix]; }
  float at(int ix, int iy) const { return values[std::size_t(iy) * width + ix]; }
  bool masked(int ix, int iy) const { return mask[std::size_t(iy) * width + ix] == 0; }
  Vec2 cell_center(int ix, int iy) const {
    return {bounds.x0 + (ix + 0.5) * resolution, bounds.y0 + (iy + 0.5) * resolution};
  }

  // min/max over unmasked cells; {0, 0} when everything is masked
  std::pair<double, double> range() const;
};

bool grid_label_valid(const std::string& label);

// Grid covering spec.bounds at `resolution`, dimensions ceil(extent/res),
// mask set from the maze's free space, values zeroed. A resolution coarser
// than half the corridor width cannot resolve the maze and is rejected.
GridField make_grid(const MazeSpec& spec, const std::string& label, double resolution);

void save_grid(std::ostream& os, const GridField& f);
GridField load_grid(std::istream& is);
void save_grid_file(const std::string& path, const GridField& f);
GridField load_grid_file(const std::string& path);

}  // namespace uclab
