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

#include <nlohmann/json.hpp>

#include "emflow/imageops/ncc.hpp"
#include "emflow/volume/section.hpp"

namespace emflow::imageops {

inline constexpr double kDefaultSizeTolerance = 0.02;

enum class MontageStatus { ok, suspect, fail };

std::string status_name(MontageStatus s);
MontageStatus parse_status(const std::string& name);

struct PairResult {
  std::size_t a = 0;  // row-major tile index
  std::size_t b = 0;
  Relation relation = Relation::right_of;
  Displacement displacement;
  bool used_nominal = false;
};

struct MontageReport {
  std::int64_t section = 0;
  std::vector<PairResult> pairs;
  std::int64_t canvas_width = 0;
  std::int64_t canvas_height = 0;
  MontageStatus status = MontageStatus::ok;
  double wall_time_s = 0.0;
};

void to_json(nlohmann::json& j, const MontageReport& r);
void from_json(const nlohmann::json& j, MontageReport& r);

struct MontageResult {
  std::vector<volume::TileOffset> offsets;  // normalized so the bbox starts at (0,0)
  GrayImage canvas;
  MontageReport report;
};

/// Canvas size a rows x cols layout produces at the nominal overlap.
std::pair<std::int64_t, std::int64_t> expected_canvas_dims(int rows, int cols, std::int64_t tile_width,
                                                           std::int64_t tile_height,
                                                           double nominal_overlap_frac);

enum class SizeCheck { pass, fail };

/// Image-size proxy for montage failure: fails when either canvas axis differs
/// from the expected size by more than `tolerance_frac` of the expected size.
SizeCheck detect_montage_failure(std::int64_t canvas_width, std::int64_t canvas_height, int rows, int cols,
                                 std::int64_t tile_width, std::int64_t tile_height,
                                 double nominal_overlap_frac, double tolerance_frac = kDefaultSizeTolerance);

/// Montages already-loaded tiles (row-major). Pair offsets are chained along
/// a row-major spanning tree anchored at tile (0,0): the first tile of each
/// row hangs below the one above it, the rest hang right of their left
/// neighbour. Low-confidence pairs fall back to the nominal offset and mark
/// the section SUSPECT; a canvas failing the size check marks it FAIL.
MontageResult montage_tiles(const std::vector<GrayImage>& tiles, int rows, int cols, std::int64_t section_index,
                            const MontageParams& params, double tolerance_frac = kDefaultSizeTolerance);

/// Loads the manifest's tiles and montages them.
MontageResult montage_section(const volume::SectionManifest& manifest, MontageParams params,
                              double tolerance_frac = kDefaultSizeTolerance);

}  // namespace emflow::imageops
