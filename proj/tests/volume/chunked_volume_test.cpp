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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "emflow/volume/chunked_volume.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace emflow;
using namespace emflow::volume;
using emflow::testing::TempDir;

namespace {

// Independent chunk-count oracle: walk chunk origins along each axis.
std::int64_t count_positions(std::int64_t dim, std::int64_t chunk) {
  std::int64_t n = 0;
  for (std::int64_t p = 0; p < dim; p += chunk) ++n;
  return n;
}

std::size_t count_chunk_files(const fs::path& level_dir) {
  if (!fs::exists(level_dir)) return 0;
  return static_cast<std::size_t>(std::count_if(fs::directory_iterator(level_dir), fs::directory_iterator{},
                                                [](const auto& e) { return e.path().extension() == ".bin"; }));
}

GrayGrid random_gray(Vec3i dims, std::mt19937& rng) {
  GrayGrid g(dims);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : g.data()) v = static_cast<std::uint8_t>(d(rng));
  return g;
}

}  // namespace

TEST_CASE("chunk grid sizes follow ceil division per axis") {
  struct Case {
    Vec3i dims, chunk, expected;
  };
  const Case cases[] = {
      {{64, 64, 64}, {64, 64, 64}, {1, 1, 1}},
      {{100, 100, 40}, {64, 64, 32}, {2, 2, 2}},
      {{6700, 9900, 1312}, {64, 64, 64}, {105, 155, 21}},
  };
  for (const auto& c : cases) {
    auto m = make_manifest("v", DType::gray8, c.dims, {1, 1, 1}, c.chunk, 1);
    const Vec3i grid = m.chunk_grid(0);
    CHECK(grid == c.expected);
    CHECK(grid.x == count_positions(c.dims.x, c.chunk.x));
    CHECK(grid.y == count_positions(c.dims.y, c.chunk.y));
    CHECK(grid.z == count_positions(c.dims.z, c.chunk.z));
  }
}

TEST_CASE("default pyramid halves until the largest dim is at most 512") {
  auto m = make_manifest("v", DType::gray8, {2000, 700, 40}, {6, 6, 40}, {64, 64, 64}, 0, false);
  CHECK(m.num_levels == 3);
  CHECK(m.dims[1] == Vec3i{1000, 350, 40});
  CHECK(m.dims[2] == Vec3i{500, 175, 40});
  CHECK(m.voxel_size[2] == Vec3d{24, 24, 40});
  auto iso = make_manifest("v", DType::gray8, {513, 10, 3}, {1, 1, 1});
  CHECK(iso.dims.back() == Vec3i{257, 5, 2});
}

TEST_CASE("create persists info.json and refuses a conflicting manifest") {
  TempDir tmp("cv");
  auto m = make_manifest("raw", DType::gray8, {100, 100, 40}, {4, 4, 40}, {64, 64, 32}, 2);
  auto vol = ChunkedVolume::create(m, tmp / "vol");
  CHECK(fs::exists(tmp / "vol" / "info.json"));
  CHECK(fs::is_directory(tmp / "vol" / "0"));
  CHECK(ChunkedVolume::open(tmp / "vol").manifest() == m);
  CHECK_NOTHROW(ChunkedVolume::create(m, tmp / "vol"));
  auto other = make_manifest("raw", DType::label32, {100, 100, 40}, {4, 4, 40}, {64, 64, 32}, 2);
  CHECK_THROWS_AS(ChunkedVolume::create(other, tmp / "vol"), Conflict);
  CHECK_THROWS_AS(ChunkedVolume::open(tmp / "missing"), NotFound);
}

TEST_CASE("write_cutout / read_cutout") {
  TempDir tmp("cv");
  std::mt19937 rng(7);
  auto vol = ChunkedVolume::create(
      make_manifest("raw", DType::gray8, {100, 100, 40}, {1, 1, 1}, {64, 64, 32}, 2), tmp / "vol");

  SUBCASE("never-written region reads as zeros") {
    auto g = vol.read<std::uint8_t>({10, 10, 10}, {20, 20, 5});
    CHECK(std::all_of(g.data().begin(), g.data().end(), [](auto v) { return v == 0; }));
  }
  SUBCASE("roundtrip is exact") {
    auto g = random_gray({30, 20, 10}, rng);
    vol.write_cutout({50, 60, 25}, g);
    auto back = std::get<GrayGrid>(vol.read_cutout({50, 60, 25}, {30, 20, 10}));
    CHECK(back == g);
  }
  SUBCASE("disjoint writes do not clobber each other") {
    auto a = random_gray({10, 10, 4}, rng);
    auto b = random_gray({10, 10, 4}, rng);
    vol.write({60, 60, 30}, a);
    vol.write({70, 60, 30}, b);
    CHECK(vol.read<std::uint8_t>({60, 60, 30}, {10, 10, 4}) == a);
    CHECK(vol.read<std::uint8_t>({70, 60, 30}, {10, 10, 4}) == b);
  }
  SUBCASE("a write spanning four chunks touches exactly those chunk files") {
    auto g = random_gray({8, 8, 4}, rng);
    vol.write({60, 60, 2}, g);
    const auto expected = vol.chunks_intersecting({60, 60, 2}, {8, 8, 4}, 0);
    CHECK(expected.size() == 4);
    for (const auto& c : expected) CHECK(fs::exists(vol.chunk_path(0, c)));
    CHECK(count_chunk_files(tmp.path() / "vol" / "0") == 4);
  }
  SUBCASE("out-of-bounds error names the axis") {
    GrayGrid g({10, 10, 10});
    try {
      vol.write({0, 95, 0}, g);
      FAIL("expected an exception");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("axis y") != std::string::npos);
    }
  }
  SUBCASE("dtype mismatch is rejected") {
    LabelGrid g({2, 2, 2});
    CHECK_THROWS_AS(vol.write_cutout({0, 0, 0}, g), InvalidArgument);
  }
}

TEST_CASE("read from a deleted dataset fails") {
  TempDir tmp("cv");
  auto vol = ChunkedVolume::create(make_manifest("raw", DType::gray8, {8, 8, 8}, {1, 1, 1}, {4, 4, 4}, 1),
                                   tmp / "vol");
  fs::remove_all(tmp / "vol");
  CHECK_THROWS_AS(vol.read_cutout({0, 0, 0}, {2, 2, 2}), NotFound);
}

TEST_CASE("property: disjoint writes commute and chunk files stay within the manifest bound") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    TempDir tmp("cv");
    std::uniform_int_distribution<int> dim(8, 40);
    const Vec3i dims{dim(rng), dim(rng), dim(rng)};
    auto m = make_manifest("p", DType::gray8, dims, {1, 1, 1}, {8, 8, 8}, 1);
    auto v1 = ChunkedVolume::create(m, tmp / "a");
    auto v2 = ChunkedVolume::create(m, tmp / "b");
    // Split the x range into two disjoint slabs.
    const std::int64_t cut = std::uniform_int_distribution<std::int64_t>(1, dims.x - 1)(rng);
    auto left = random_gray({cut, dims.y, dims.z}, rng);
    auto right = random_gray({dims.x - cut, dims.y, dims.z}, rng);
    v1.write({0, 0, 0}, left);
    v1.write({cut, 0, 0}, right);
    v2.write({cut, 0, 0}, right);
    v2.write({0, 0, 0}, left);
    CHECK(v1.read_level<std::uint8_t>() == v2.read_level<std::uint8_t>());
    const Vec3i g = m.chunk_grid(0);
    CHECK(count_chunk_files(tmp / "a" / "0") <= static_cast<std::size_t>(g.volume()));
  }
}

TEST_CASE("downsample") {
  TempDir tmp("cv");
  SUBCASE("mean of a constant volume is the constant") {
    auto vol = ChunkedVolume::create(make_manifest("g", DType::gray8, {37, 20, 9}, {1, 1, 1}, {16, 16, 16}, 3),
                                     tmp / "g");
    vol.write({0, 0, 0}, GrayGrid({37, 20, 9}, {1, 1, 1}, 100));
    vol.build_pyramid();
    CHECK(vol.dims(1) == Vec3i{19, 10, 5});
    for (int l = 1; l < 3; ++l) {
      auto g = vol.read_level<std::uint8_t>(l);
      CHECK(std::all_of(g.data().begin(), g.data().end(), [](auto v) { return v == 100; }));
    }
  }
  SUBCASE("mean of {0,0,0,0,255,255,255,255} rounds half up to 128") {
    auto vol = ChunkedVolume::create(make_manifest("g", DType::gray8, {2, 2, 2}, {1, 1, 1}, {2, 2, 2}, 2),
                                     tmp / "g");
    GrayGrid block({2, 2, 2});
    for (std::int64_t y = 0; y < 2; ++y)
      for (std::int64_t x = 0; x < 2; ++x) block(x, y, 1) = 255;
    vol.write({0, 0, 0}, block);
    vol.downsample(0, DownsampleMethod::mean);
    CHECK(vol.read<std::uint8_t>({0, 0, 0}, {1, 1, 1}, 1)[0] == 128);
  }
  SUBCASE("mode picks the most frequent label, smallest on ties") {
    auto vol = ChunkedVolume::create(make_manifest("l", DType::label32, {4, 2, 2}, {1, 1, 1}, {4, 4, 4}, 2),
                                     tmp / "l");
    LabelGrid g({4, 2, 2});
    // block 0: {5,5,5,5,7,7,0,0}; block 1: {3,3,3,3,2,2,2,2} (tie -> 2)
    const std::uint32_t b0[8] = {5, 5, 5, 5, 7, 7, 0, 0};
    const std::uint32_t b1[8] = {3, 3, 3, 3, 2, 2, 2, 2};
    for (int i = 0; i < 8; ++i) {
      const int x = i & 1, y = (i >> 1) & 1, z = i >> 2;
      g(x, y, z) = b0[i];
      g(2 + x, y, z) = b1[i];
    }
    vol.write({0, 0, 0}, g);
    vol.downsample(0, DownsampleMethod::mode);
    auto d = vol.read_level<std::uint32_t>(1);
    CHECK(d(0, 0, 0) == 5);
    CHECK(d(1, 0, 0) == 2);
  }
  SUBCASE("method / dtype mismatch") {
    auto g = ChunkedVolume::create(make_manifest("g", DType::gray8, {4, 4, 4}, {1, 1, 1}, {4, 4, 4}, 2), tmp / "g");
    auto l = ChunkedVolume::create(make_manifest("l", DType::label32, {4, 4, 4}, {1, 1, 1}, {4, 4, 4}, 2), tmp / "l");
    CHECK_THROWS_AS(g.downsample(0, DownsampleMethod::mode), InvalidArgument);
    CHECK_THROWS_AS(l.downsample(0, DownsampleMethod::mean), InvalidArgument);
    CHECK_THROWS_AS(g.downsample(1, DownsampleMethod::mean), InvalidArgument);
  }
  SUBCASE("property: every mode output is a member of its block") {
    std::mt19937 rng(3);
    auto vol = ChunkedVolume::create(make_manifest("l", DType::label32, {15, 13, 11}, {1, 1, 1}, {8, 8, 8}, 2),
                                     tmp / "l");
    LabelGrid g({15, 13, 11});
    std::uniform_int_distribution<std::uint32_t> lab(0, 4);
    for (auto& v : g.data()) v = lab(rng);
    vol.write({0, 0, 0}, g);
    vol.downsample(0, DownsampleMethod::mode);
    auto d = vol.read_level<std::uint32_t>(1);
    for (std::int64_t z = 0; z < d.dims().z; ++z)
      for (std::int64_t y = 0; y < d.dims().y; ++y)
        for (std::int64_t x = 0; x < d.dims().x; ++x) {
          bool member = false;
          for (int i = 0; i < 8; ++i) {
            const std::int64_t ix = 2 * x + (i & 1), iy = 2 * y + ((i >> 1) & 1), iz = 2 * z + (i >> 2);
            if (g.contains(ix, iy, iz) && g(ix, iy, iz) == d(x, y, z)) member = true;
          }
          CHECK(member);
        }
  }
}

TEST_CASE("read at level 1 after downsample has ceil-halved dims") {
  TempDir tmp("cv");
  auto vol = ChunkedVolume::create(make_manifest("g", DType::gray8, {33, 17, 5}, {1, 1, 1}, {8, 8, 8}, 2, false),
                                   tmp / "g");
  vol.write({0, 0, 0}, GrayGrid({33, 17, 5}, {1, 1, 1}, 9));
  vol.downsample(0, DownsampleMethod::mean);
  auto g = vol.read_level<std::uint8_t>(1);
  CHECK(g.dims() == Vec3i{17, 9, 5});
  CHECK(g(16, 8, 4) == 9);
}
