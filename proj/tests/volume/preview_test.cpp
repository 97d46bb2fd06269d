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
#include "emflow/volume/preview.hpp"
#include "test_util.hpp"

using namespace emflow;
using namespace emflow::volume;
using emflow::testing::TempDir;

TEST_CASE("gray preview at scale 1 is the raw slice") {
  TempDir tmp("pv");
  auto vol = ChunkedVolume::create(make_manifest("g", DType::gray8, {21, 13, 4}, {1, 1, 1}, {8, 8, 8}, 3, false),
                                   tmp / "g");
  GrayGrid g({21, 13, 4});
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<std::uint8_t>(i * 13 % 256);
  vol.write({0, 0, 0}, g);
  vol.build_pyramid();

  auto p = make_preview(vol, "aligned", 2, 1);
  CHECK(std::get<GrayImage>(p.image) == slice_z(g, 2));

  auto p4 = make_preview(vol, "aligned", 2, 4);
  CHECK(p4.width() == ceil_div(21, 4));
  CHECK(p4.height() == ceil_div(13, 4));
  CHECK(p4.png() == make_preview(vol, "aligned", 2, 4).png());

  CHECK_THROWS_AS(make_preview(vol, "aligned", 4, 1), InvalidArgument);
  CHECK_THROWS_AS(make_preview(vol, "aligned", 0, 3), InvalidArgument);
  CHECK_THROWS_AS(make_preview(vol, "aligned", 0, 8), InvalidArgument);
}

TEST_CASE("label previews use a deterministic color per label") {
  TempDir tmp("pv");
  auto vol = ChunkedVolume::create(make_manifest("l", DType::label32, {8, 8, 2}, {1, 1, 1}, {8, 8, 8}, 1), tmp / "l");
  LabelGrid g({8, 8, 2});
  g(1, 1, 0) = 42;
  g(5, 6, 1) = 42;
  g(2, 2, 1) = 7;
  vol.write({0, 0, 0}, g);
  auto a = std::get<RgbImage>(make_preview(vol, "seg", 0, 1).image);
  auto b = std::get<RgbImage>(make_preview(vol, "seg", 1, 1).image);
  CHECK(a(1, 1) == b(5, 6));
  CHECK(a(1, 1) == label_color(42));
  CHECK(a(0, 0) == Rgb{0, 0, 0});
  CHECK_FALSE(b(2, 2) == b(5, 6));
}

TEST_CASE("downscale_pow2 matches repeated halving") {
  GrayImage im(9, 5, 50);
  auto d = downscale_pow2(im, 4);
  CHECK(d.width() == 3);
  CHECK(d.height() == 2);
  CHECK(d(2, 1) == 50);
}
