#include "uclab/gridfield.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace uclab {

static_assert(std::endian::native == std::endian::little,
              "grid files are little-endian; big-endian hosts need byte swaps");

namespace {

int grid_cells(double extent, double res) {
  // tolerance keeps exact multiples from picking up a spurious extra cell
  return int(std::ceil(extent / res - 1e-9));
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& what) { throw GridError(what); }

}  // namespace

std::pair<double, double> GridField::range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) continue;
    lo = std::min(lo, double(values[i]));
    hi = std::max(hi, double(values[i]));
  }
  if (lo > hi) return {0.0, 0.0};
  return {lo, hi};
}

bool grid_label_valid(const std::string& label) {
  return label == "value" || label == "value-error" || label == "uncertainty" ||
         label == "goal-probability" || label == "oracle-value";
}

GridField make_grid(const MazeSpec& spec, const std::string& label, double resolution) {
  if (!grid_label_valid(label)) fail("unknown grid label: " + label);
  if (!(resolution > 0)) fail("grid resolution must be positive");
  if (resolution > spec.corridor_width / 2)
    fail("grid resolution coarser than half the corridor width");
  GridField f;
  f.label = label;
  f.bounds = spec.bounds;
  f.resolution = resolution;
  f.width = grid_cells(spec.bounds.width(), resolution);
  f.height = grid_cells(spec.bounds.height(), resolution);
  f.values.assign(f.cells(), 0.0f);
  f.mask.assign(f.cells(), 0);
  for (int iy = 0; iy < f.height; ++iy)
    for (int ix = 0; ix < f.width; ++ix)
      if (spec.in_free_space(f.cell_center(ix, iy)))
        f.mask[std::size_t(iy) * f.width + ix] = 1;
  return f;
}

void save_grid(std::ostream& os, const GridField& f) {
  if (!grid_label_valid(f.label)) fail("unknown grid label: " + f.label);
  if (f.values.size() != f.cells() || f.mask.size() != f.cells())
    fail("grid value/mask size does not match dimensions");
  if (f.note.find('\n') != std::string::npos) fail("grid note must be a single line");
  auto [lo, hi] = f.range();
  os << "uclab-grid 1\n";
  os << "label " << f.label << "\n";
  os << "bounds " << fmt_g17(f.bounds.x0) << " " << fmt_g17(f.bounds.y0) << " "
     << fmt_g17(f.bounds.x1) << " " << fmt_g17(f.bounds.y1) << "\n";
  os << "resolution " << fmt_g17(f.resolution) << "\n";
  os << "size " << f.width << " " << f.height << "\n";
  os << "range " << fmt_g17(lo) << " " << fmt_g17(hi) << "\n";
  if (!f.note.empty()) os << "note " << f.note << "\n";
  os << "data\n";
  os.write(reinterpret_cast<const char*>(f.values.data()),
           std::streamsize(f.values.size() * sizeof(float)));
  std::vector<std::uint8_t> bits((f.cells() + 7) / 8, 0);
  for (std::size_t i = 0; i < f.mask.size(); ++i)
    if (f.mask[i]) bits[i >> 3] |= std::uint8_t(1u << (i & 7));
  os.write(reinterpret_cast<const char*>(bits.data()), std::streamsize(bits.size()));
  if (!os) fail("grid write failed");
}

GridField load_grid(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "uclab-grid 1")
    fail("not a uclab grid file (bad magic)");
  GridField f;
  bool have_size = false;
  while (std::getline(is, line)) {
    if (line == "data") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "label") {
      ls >> f.label;
    } else if (key == "bounds") {
      ls >> f.bounds.x0 >> f.bounds.y0 >> f.bounds.x1 >> f.bounds.y1;
    } else if (key == "resolution") {
      ls >> f.resolution;
    } else if (key == "size") {
      ls >> f.width >> f.height;
      have_size = true;
    } else if (key == "range") {
      double lo, hi;
      ls >> lo >> hi;
    } else if (key == "note") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      f.note = rest;
    } else {
      fail("unknown grid header key: " + key);
    }
    if (ls.fail()) fail("malformed grid header line: " + line);
  }
  if (line != "data") fail("grid header missing data marker");
  if (!grid_label_valid(f.label)) fail("unknown grid label: " + f.label);
  if (!have_size || f.width <= 0 || f.height <= 0) fail("grid header missing size");
  if (!(f.resolution > 0)) fail("grid header missing resolution");
  f.values.resize(f.cells());
  is.read(reinterpret_cast<char*>(f.values.data()),
          std::streamsize(f.values.size() * sizeof(float)));
  std::vector<std::uint8_t> bits((f.cells() + 7) / 8, 0);
  is.read(reinterpret_cast<char*>(bits.data()), std::streamsize(bits.size()));
  if (!is) fail("grid data truncated");
  f.mask.assign(f.cells(), 0);
  for (std::size_t i = 0; i < f.mask.size(); ++i)
    f.mask[i] = (bits[i >> 3] >> (i & 7)) & 1u;
  return f;
}

void save_grid_file(const std::string& path, const GridField& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail("cannot open grid file for writing: " + path);
  save_grid(os, f);
}

GridField load_grid_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("cannot open grid file: " + path);
  return load_grid(is);
}

}  // namespace uclab
