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

#pragma once

#include <string>
#include <vector>

#include "emflow/volume/grid.hpp"

namespace emflow::imageops {

using volume::FloatImage;
using volume::GrayImage;

/// Search bounds for tile matching. The octave bounds limit which pyramid
/// levels take part: only levels whose width lies in
/// [min_octave_px, max_octave_px] are searched.
struct MontageParams {
  std::int64_t min_octave_px = 128;
  std::int64_t max_octave_px = 4096;
  double nominal_overlap_frac = 0.05;
  double search_margin_frac = 0.1;
  double ncc_accept_threshold = 0.2;

  void validate() const;
};

/// Where tile b sits relative to tile a.
enum class Relation { right_of, below, left_of, above };

std::string relation_name(Relation r);
Relation parse_relation(const std::string& name);

/// Offset of tile b from its nominal placement next to tile a, at full
/// resolution.
struct Displacement {
  std::int64_t dx = 0;
  std::int64_t dy = 0;
  double score = 0.0;
  std::int64_t octave_used = 0;  // width of the finest level searched
  bool low_confidence = false;
  std::int64_t candidates_evaluated = 0;
};

/// Nominal top-left of tile b in tile a's frame for a tile size and relation.
std::pair<std::int64_t, std::int64_t> nominal_position(std::int64_t width, std::int64_t height,
                                                       Relation relation, double overlap_frac);

/// Normalized cross-correlation of the overlap of `a` with `b` placed at
/// (px, py) in a's frame. Zero-variance overlaps score 0; an empty overlap
/// scores 0.
double overlap_ncc(const FloatImage& a, const FloatImage& b, std::int64_t px, std::int64_t py);

/// 2x2 box-mean pyramid; level 0 is the input, level L has width
/// ceil(width / 2^L). Stops once the image is 1x1.
std::vector<FloatImage> box_pyramid(const GrayImage& image);

/// Coarse-to-fine NCC search for the placement of tile_b next to tile_a.
///
/// An exhaustive search runs over the window at the coarsest admissible
/// level. Each finer admissible level re-searches +-1 pixel around the
/// doubled position. Among equal scores the candidate nearest the nominal
/// placement wins. A score under the accept threshold sets low_confidence.
Displacement ncc_displacement(const GrayImage& tile_a, const GrayImage& tile_b, Relation relation,
                              const MontageParams& params);

}  // namespace emflow::imageops
