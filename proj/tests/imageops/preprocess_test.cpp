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

#include <random>

#include "doctest.h"
#include "emflow/imageops/preprocess.hpp"

using namespace emflow;
using namespace emflow::imageops;

TEST_CASE("contrast_normalize") {
  PreprocessParams p;
  p.low_pct = 0;
  p.high_pct = 100;

  SUBCASE("full-range ramp is unchanged") {
    GrayImage ramp(256, 1);
    for (int x = 0; x < 256; ++x) ramp(x, 0) = static_cast<std::uint8_t>(x);
    CHECK(contrast_normalize(ramp, p) == ramp);
  }
  SUBCASE("constant image is unchanged") {
    GrayImage flat(7, 5, 93);
    CHECK(contrast_normalize(flat, p) == flat);
  }
  SUBCASE("values 10..20 stretch to 0..255 with 15 -> 128") {
    GrayImage im(11, 1);
    for (int x = 0; x < 11; ++x) im(x, 0) = static_cast<std::uint8_t>(10 + x);
    auto out = contrast_normalize(im, p);
    CHECK(out(0, 0) == 0);
    CHECK(out(10, 0) == 255);
    CHECK(out(5, 0) == 128);
    // independent oracle: floor(x + 1/2) of the exact rational map
    for (int x = 0; x < 11; ++x) {
      const int expected = static_cast<int>(std::floor(x * 255.0 / 10.0 + 0.5));
      CHECK(out(x, 0) == expected);
    }
  }
  SUBCASE("percentile clipping saturates outliers") {
    GrayImage im(100, 1, 50);
    im(0, 0) = 0;
    im(99, 0) = 255;
    im(50, 0) = 100;
    p.low_pct = 2;
    p.high_pct = 98;
    // p2 and p98 both land on 50: degenerate
    CHECK(contrast_normalize(im, p) == im);
  }
  SUBCASE("invalid percentiles") {
    p.low_pct = 60;
    p.high_pct = 40;
    CHECK_THROWS_AS(contrast_normalize(GrayImage(2, 2), p), InvalidArgument);
  }
}

TEST_CASE("percentile is nearest-rank") {
  GrayImage im(10, 1);
  for (int x = 0; x < 10; ++x) im(x, 0) = static_cast<std::uint8_t>(10 * (x + 1));
  CHECK(percentile(im, 0) == 10);
  CHECK(percentile(im, 10) == 10);
  CHECK(percentile(im, 11) == 20);
  CHECK(percentile(im, 50) == 50);
  CHECK(percentile(im, 100) == 100);
}

TEST_CASE("clip_artifacts") {
  PreprocessParams p;
  p.clip_low = 20;
  p.clip_high = 250;
  GrayImage inside(3, 1, 100);
  CHECK(clip_artifacts(inside, p) == inside);
  GrayImage hot(1, 1, 255);
  CHECK(clip_artifacts(hot, p)(0, 0) == 250);

  std::mt19937 rng(5);
  std::uniform_int_distribution<int> d(0, 255);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage im(17, 9);
    for (auto& v : im.data()) v = static_cast<std::uint8_t>(d(rng));
    const auto out = clip_artifacts(im, p);
    const auto [mn, mx] = std::minmax_element(out.data().begin(), out.data().end());
    CHECK(*mn >= p.clip_low);
    CHECK(*mx <= p.clip_high);
  }
  p.clip_low = 250;
  CHECK_THROWS_AS(clip_artifacts(inside, p), InvalidArgument);
}

TEST_CASE("downscale and preprocess") {
  GrayImage im(5, 3, 40);
  im(4, 2) = 200;
  auto d = downscale(im, 2);
  CHECK(d.width() == 3);
  CHECK(d.height() == 2);
  CHECK(d(0, 0) == 40);
  CHECK(d(2, 1) == 200);

  PreprocessParams p;
  p.low_pct = 0;
  p.high_pct = 100;
  p.scale = 2;
  auto out = preprocess(im, p);
  CHECK(out.width() == 3);
  CHECK(out(0, 0) == 0);
  CHECK(out(2, 1) == 255);
}
