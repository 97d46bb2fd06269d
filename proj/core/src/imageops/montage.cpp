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

#include "emflow/imageops/montage.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

namespace emflow::imageops {
using nlohmann::json;

std::string status_name(MontageStatus s) {
  switch (s) {
    case MontageStatus::ok: return "OK";
    case MontageStatus::suspect: return "SUSPECT";
    case MontageStatus::fail: return "FAIL";
  }
  return "?";
}

MontageStatus parse_status(const std::string& name) {
  for (auto s : {MontageStatus::ok, MontageStatus::suspect, MontageStatus::fail}) {
    if (status_name(s) == name) return s;
  }
  throw InvalidArgument("unknown montage status '" + name + "'");
}

void to_json(json& j, const MontageReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"a", p.a},
                     {"b", p.b},
                     {"relation", relation_name(p.relation)},
                     {"dx", p.displacement.dx},
                     {"dy", p.displacement.dy},
                     {"score", p.displacement.score},
                     {"octave_used", p.displacement.octave_used},
                     {"low_confidence", p.displacement.low_confidence},
                     {"used_nominal", p.used_nominal}});
  }
  j = json{{"section", r.section},
           {"pairs", pairs},
           {"canvas_dims", json::array({r.canvas_width, r.canvas_height})},
           {"status", status_name(r.status)},
           {"wall_time_s", r.wall_time_s}};
}

void from_json(const json& j, MontageReport& r) {
  r.section = j.at("section").get<std::int64_t>();
  r.pairs.clear();
  for (const auto& p : j.at("pairs")) {
    PairResult pr;
    pr.a = p.at("a").get<std::size_t>();
    pr.b = p.at("b").get<std::size_t>();
    pr.relation = parse_relation(p.value("relation", "right_of"));
    pr.displacement.dx = p.at("dx").get<std::int64_t>();
    pr.displacement.dy = p.at("dy").get<std::int64_t>();
    pr.displacement.score = p.at("score").get<double>();
    pr.displacement.octave_used = p.value("octave_used", std::int64_t{0});
    pr.displacement.low_confidence = p.value("low_confidence", false);
    pr.used_nominal = p.value("used_nominal", false);
    r.pairs.push_back(pr);
  }
  r.canvas_width = j.at("canvas_dims").at(0).get<std::int64_t>();
  r.canvas_height = j.at("canvas_dims").at(1).get<std::int64_t>();
  r.status = parse_status(j.at("status").get<std::string>());
  r.wall_time_s = j.at("wall_time_s").get<double>();
}

std::pair<std::int64_t, std::int64_t> expected_canvas_dims(int rows, int cols, std::int64_t tile_width,
                                                           std::int64_t tile_height,
                                                           double nominal_overlap_frac) {
  const std::int64_t ox = std::llround(nominal_overlap_frac * static_cast<double>(tile_width));
  const std::int64_t oy = std::llround(nominal_overlap_frac * static_cast<double>(tile_height));
  return {cols * tile_width - (cols - 1) * ox, rows * tile_height - (rows - 1) * oy};
}

SizeCheck detect_montage_failure(std::int64_t canvas_width, std::int64_t canvas_height, int rows, int cols,
                                 std::int64_t tile_width, std::int64_t tile_height,
                                 double nominal_overlap_frac, double tolerance_frac) {
  if (tolerance_frac < 0.0) throw InvalidArgument("tolerance_frac must be >= 0");
  const auto [ew, eh] = expected_canvas_dims(rows, cols, tile_width, tile_height, nominal_overlap_frac);
  auto off = [&](std::int64_t actual, std::int64_t expected) {
    return static_cast<double>(std::llabs(actual - expected)) > tolerance_frac * static_cast<double>(expected);
  };
  return off(canvas_width, ew) || off(canvas_height, eh) ? SizeCheck::fail : SizeCheck::pass;
}

MontageResult montage_tiles(const std::vector<GrayImage>& tiles, int rows, int cols, std::int64_t section_index,
                            const MontageParams& params, double tolerance_frac) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  if (rows < 1 || cols < 1 || tiles.size() != static_cast<std::size_t>(rows * cols)) {
    throw InvalidArgument("tile count does not match the layout");
  }
  const std::int64_t W = tiles.front().width(), H = tiles.front().height();
  for (const auto& t : tiles) {
    if (t.width() != W || t.height() != H) throw InvalidArgument("tiles of one section must share dims");
  }

  MontageResult result;
  result.report.section = section_index;
  std::vector<volume::TileOffset> pos(tiles.size());
  bool suspect = false;
  auto link = [&](std::size_t a, std::size_t b, Relation rel) {
    PairResult pr{a, b, rel, ncc_displacement(tiles[a], tiles[b], rel, params), false};
    auto [nx, ny] = nominal_position(W, H, rel, params.nominal_overlap_frac);
    if (pr.displacement.low_confidence) {
      pr.used_nominal = true;
      suspect = true;
    } else {
      nx += pr.displacement.dx;
      ny += pr.displacement.dy;
    }
    pos[b] = {pos[a].x + nx, pos[a].y + ny};
    result.report.pairs.push_back(pr);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto idx = static_cast<std::size_t>(r * cols + c);
      if (c > 0) {
        link(idx - 1, idx, Relation::right_of);
      } else if (r > 0) {
        link(idx - static_cast<std::size_t>(cols), idx, Relation::below);
      }
    }
  }

  std::int64_t min_x = pos[0].x, min_y = pos[0].y;
  for (const auto& p : pos) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
  }
  for (auto& p : pos) p = {p.x - min_x, p.y - min_y};
  result.canvas = volume::composite_tiles(tiles, pos);
  result.offsets = std::move(pos);

  auto& rep = result.report;
  rep.canvas_width = result.canvas.width();
  rep.canvas_height = result.canvas.height();
  const bool size_ok = detect_montage_failure(rep.canvas_width, rep.canvas_height, rows, cols, W, H,
                                              params.nominal_overlap_frac, tolerance_frac) == SizeCheck::pass;
  rep.status = !size_ok ? MontageStatus::fail : suspect ? MontageStatus::suspect : MontageStatus::ok;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

MontageResult montage_section(const volume::SectionManifest& manifest, MontageParams params,
                              double tolerance_frac) {
  manifest.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto tiles = volume::load_tiles(manifest);
  if (manifest.nominal_overlap_frac > 0.0) params.nominal_overlap_frac = manifest.nominal_overlap_frac;
  auto result = montage_tiles(tiles, manifest.rows, manifest.cols, manifest.section_index, params, tolerance_frac);
  result.report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace emflow::imageops
