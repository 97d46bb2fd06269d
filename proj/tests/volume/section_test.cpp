// Copyright 2026 The emflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"
#include "emflow/volume/png_io.hpp"
#include "emflow/volume/section.hpp"
#include "test_util.hpp"

using namespace emflow;
using namespace emflow::volume;
using emflow::testing::TempDir;

namespace {

GrayImage ramp(std::int64_t w, std::int64_t h, int seed) {
  GrayImage im(w, h);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) im(x, y) = static_cast<std::uint8_t>((x * 7 + y * 3 + seed) % 256);
  return im;
}

}  // namespace

TEST_CASE("PNG roundtrip is lossless") {
  TempDir tmp("png");
  auto im = ramp(31, 17, 5);
  write_png(tmp / "a.png", im);
  CHECK(read_png_gray(tmp / "a.png") == im);
  CHECK_THROWS_AS(read_png_gray(tmp / "missing.png"), NotFound);
}

TEST_CASE("composite of a single tile is the tile") {
  auto im = ramp(40, 30, 1);
  CHECK(composite_tiles({im}, {{0, 0}}) == im);
  CHECK(composite_tiles({im}, {{12, -4}}) == im);
}

TEST_CASE("canvas is the bounding box of placed tiles") {
  auto a = ramp(100, 80, 0), b = ramp(100, 80, 3);
  auto canvas = composite_tiles({a, b}, {{0, 0}, {95, 0}});
  CHECK(canvas.width() == 195);
  CHECK(canvas.height() == 80);
  auto shifted = composite_tiles({a, b}, {{0, 0}, {95, -6}});
  CHECK(shifted.width() == 195);
  CHECK(shifted.height() == 86);
}

TEST_CASE("feathering of identical overlap content reproduces it exactly") {
  // Two crops of one image; their overlap band holds identical pixels.
  GrayImage world(180, 60);
  for (std::int64_t y = 0; y < 60; ++y)
    for (std::int64_t x = 0; x < 180; ++x) world(x, y) = static_cast<std::uint8_t>((x * x + 3 * y) % 251);
  GrayImage a(100, 60), b(100, 60);
  for (std::int64_t y = 0; y < 60; ++y)
    for (std::int64_t x = 0; x < 100; ++x) {
      a(x, y) = world(x, y);
      b(x, y) = world(x + 80, y);
    }
  CHECK(composite_tiles({a, b}, {{0, 0}, {80, 0}}) == world);
}

TEST_CASE("feather weights ramp linearly across the band") {
  GrayImage a(10, 21, 0), b(10, 21, 200);
  auto c = composite_tiles({a, b}, {{0, 0}, {6, 0}});
  // middle row, overlap x in [6,10): weights a = 4,3,2,1 ; b = 1,2,3,4
  CHECK(c(6, 10) == 40);
  CHECK(c(7, 10) == 80);
  CHECK(c(8, 10) == 120);
  CHECK(c(9, 10) == 160);
}

TEST_CASE("import_section reads tiles from the manifest and reports missing files") {
  TempDir tmp("sec");
  auto a = ramp(50, 40, 0), b = ramp(50, 40, 9);
  write_png(tmp / "t0.png", a);
  write_png(tmp / "t1.png", b);
  SectionManifest m;
  m.section_index = 3;
  m.rows = 1;
  m.cols = 2;
  m.nominal_overlap_frac = 0.1;
  m.tile_paths = {"t0.png", "t1.png"};
  save_section_manifest(tmp / "manifest.json", m);
  auto loaded = load_section_manifest(tmp / "manifest.json");
  CHECK(loaded.tile_paths[0] == tmp / "t0.png");
  auto canvas = import_section(loaded, {{0, 0}, {45, 0}});
  CHECK(canvas.width() == 95);

  loaded.tile_paths[1] = tmp / "gone.png";
  try {
    import_section(loaded, {{0, 0}, {45, 0}});
    FAIL("expected NotFound");
  } catch (const NotFound& e) {
    CHECK(std::string(e.what()).find("gone.png") != std::string::npos);
  }
  m.tile_paths.pop_back();
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
}
