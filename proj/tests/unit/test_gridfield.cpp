#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "doctest.h"
#include "uclab/gridfield.hpp"
#include "uclab/rng.hpp"

using namespace uclab;

TEST_SUITE("gridfield") {

TEST_CASE("make_grid covers the bounds and masks the walls") {
  const MazeSpec spec = generate_m_maze(4);  // bounds 4 x 3
  GridField f = make_grid(spec, "value", 0.1);
  CHECK(f.width == 40);
  CHECK(f.height == 30);
  CHECK(f.cells() == 1200);
  CHECK(f.resolution == 0.1);
  CHECK(f.label == "value");

  int free_cells = 0;
  for (int iy = 0; iy < f.height; ++iy)
    for (int ix = 0; ix < f.width; ++ix) {
      const bool want_free = spec.in_free_space(f.cell_center(ix, iy));
      CHECK(f.masked(ix, iy) == !want_free);
      free_cells += want_free ? 1 : 0;
    }
  CHECK(free_cells > 0);
  CHECK(free_cells < int(f.cells()));

  // row 0 sits at the bottom edge
  CHECK(f.cell_center(0, 0).y == doctest::Approx(spec.bounds.y0 + 0.05));
}

TEST_CASE("dimensions come from ceil and tolerate near-exact multiples") {
  const MazeSpec spec = generate_m_maze(4);
  // 4 / 0.3 = 13.33 -> 14; 3 / 0.3 = 10
  GridField f = make_grid(spec, "value", 0.3);
  CHECK(f.width == 14);
  CHECK(f.height == 10);
  // 4/0.25 and 3/0.25 are exact: no phantom extra row from float noise
  GridField g = make_grid(spec, "value", 0.25);
  CHECK(g.width == 16);
  CHECK(g.height == 12);
}

TEST_CASE("resolutions coarser than half the corridor are rejected") {
  const MazeSpec spec = generate_m_maze(4);  // corridor width 1
  CHECK_THROWS_AS(make_grid(spec, "value", 0.51), GridError);
  CHECK_NOTHROW(make_grid(spec, "value", 0.5));
  CHECK_THROWS_AS(make_grid(spec, "value", 0.0), GridError);
  CHECK_THROWS_AS(make_grid(spec, "value", -0.1), GridError);
}

TEST_CASE("only the known labels are accepted") {
  for (const char* ok : {"value", "value-error", "uncertainty", "goal-probability",
                         "oracle-value"})
    CHECK(grid_label_valid(ok));
  CHECK(!grid_label_valid("heat"));
  CHECK(!grid_label_valid(""));
  const MazeSpec spec = generate_m_maze(4);
  CHECK_THROWS_AS(make_grid(spec, "heat", 0.1), GridError);
}

TEST_CASE("range scans unmasked cells only") {
  const MazeSpec spec = generate_m_maze(4);
  GridField f = make_grid(spec, "value", 0.5);
  for (int iy = 0; iy < f.height; ++iy)
    for (int ix = 0; ix < f.width; ++ix)
      f.at(ix, iy) = f.masked(ix, iy) ? 1e9f : float(ix + iy);
  const auto [lo, hi] = f.range();
  CHECK(lo == 0.0);
  CHECK(hi < 1e9);
  CHECK(hi >= 1.0);
}

TEST_CASE("serialization round-trips bitwise, note included") {
  const MazeSpec spec = generate_m_maze(4);
  GridField f = make_grid(spec, "goal-probability", 0.2);
  Rng rng(31);
  for (auto& v : f.values) v = float(rng.uniform(-5, 5));
  f.note = "uniform-fallback";

  std::ostringstream os(std::ios::binary);
  save_grid(os, f);
  const std::string blob = os.str();
  std::istringstream is(blob, std::ios::binary);
  const GridField back = load_grid(is);

  CHECK(back.label == f.label);
  CHECK(back.bounds.x0 == f.bounds.x0);
  CHECK(back.bounds.y1 == f.bounds.y1);
  CHECK(back.resolution == f.resolution);
  CHECK(back.width == f.width);
  CHECK(back.height == f.height);
  CHECK(back.values == f.values);
  CHECK(back.mask == f.mask);
  CHECK(back.note == f.note);

  // and byte-for-byte through a second save
  std::ostringstream os2(std::ios::binary);
  save_grid(os2, back);
  CHECK(os2.str() == blob);

  // file variant
  const std::string path = "/tmp/uclab-test-grid.bin";
  save_grid_file(path, f);
  const GridField from_file = load_grid_file(path);
  CHECK(from_file.values == f.values);
  CHECK(from_file.note == f.note);
  std::remove(path.c_str());
}

TEST_CASE("the note survives only as a single line and spaces are preserved") {
  const MazeSpec spec = generate_m_maze(4);
  GridField f = make_grid(spec, "value", 0.5);
  f.note = "two words  spaced";
  std::ostringstream os(std::ios::binary);
  save_grid(os, f);
  std::istringstream is(os.str(), std::ios::binary);
  CHECK(load_grid(is).note == "two words  spaced");

  f.note = "line\nbreak";
  std::ostringstream bad(std::ios::binary);
  CHECK_THROWS_AS(save_grid(bad, f), GridError);
}

TEST_CASE("loading rejects malformed input") {
  std::istringstream empty("");
  CHECK_THROWS_AS(load_grid(empty), GridError);

  std::istringstream wrong_magic("uclab-mazes 1\n");
  CHECK_THROWS_AS(load_grid(wrong_magic), GridError);

  std::istringstream unknown_key(
      "uclab-grid 1\nlabel value\nbogus 3\ndata\n");
  CHECK_THROWS_AS(load_grid(unknown_key), GridError);

  // truncated data block
  const MazeSpec spec = generate_m_maze(4);
  GridField f = make_grid(spec, "value", 0.5);
  std::ostringstream os(std::ios::binary);
  save_grid(os, f);
  const std::string blob = os.str();
  std::istringstream cut(blob.substr(0, blob.size() - 16), std::ios::binary);
  CHECK_THROWS_AS(load_grid(cut), GridError);

  std::istringstream bad_label(
      "uclab-grid 1\nlabel heat\nbounds 0 0 1 1\nresolution 0.5\nsize 2 2\n"
      "range 0 0\ndata\n");
  CHECK_THROWS_AS(load_grid(bad_label), GridError);

  CHECK_THROWS_AS(load_grid_file("/tmp/uclab-test-no-grid.bin"), GridError);
}

}  // TEST_SUITE
