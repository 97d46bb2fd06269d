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

#include "emflow/sim/em_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "emflow/sim/texture.hpp"
#include "emflow/volume/png_io.hpp"

namespace emflow::sim {
namespace fs = std::filesystem;

double Profile::distance(Vec2d p, std::int64_t section) const {
  const auto s = static_cast<double>(section);
  const Vec2d pa{a.x + drift.x * s, a.y + drift.y * s};
  const double ux = b.x - a.x, uy = b.y - a.y;
  const double len2 = ux * ux + uy * uy;
  double t = len2 > 0.0 ? ((p.x - pa.x) * ux + (p.y - pa.y) * uy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (pa.x + t * ux), p.y - (pa.y + t * uy));
}

namespace {

std::int64_t overlap_px(double frac, std::int64_t len) { return std::llround(frac * static_cast<double>(len)); }

// Samples the axis of `a` finely enough that no point of `b` slips between samples.
bool clear_of(const Profile& a, const Profile& b, int sections, double gap) {
  const double len = std::hypot(a.b.x - a.a.x, a.b.y - a.a.y);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 2.0)));
  for (int s = 0; s < sections; ++s) {
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const double ds = static_cast<double>(s);
      const Vec2d p{a.a.x + t * (a.b.x - a.a.x) + a.drift.x * ds, a.a.y + t * (a.b.y - a.a.y) + a.drift.y * ds};
      if (b.distance(p, s) < a.radius + b.radius + gap - 1.0) return false;
    }
  }
  return true;
}

}  // namespace

EmSimulator::EmSimulator(EmDatasetParams params) : params_(std::move(params)) {
  auto& p = params_;
  config().validate();
  if (p.sections < 1) throw InvalidArgument("need at least one section");
  if (p.stage_jitter_px < 0 || p.tile_jitter_px < 0) throw InvalidArgument("jitter must be >= 0");
  if (!(p.neurite_radius_min > 0 && p.neurite_radius_max >= p.neurite_radius_min)) {
    throw InvalidArgument("neurite radii must satisfy 0 < min <= max");
  }
  const auto [cw, ch] = config().section_dims();
  margin_ = p.stage_jitter_px + p.tile_jitter_px + 2;
  world_w_ = cw + 2 * margin_;
  world_h_ = ch + 2 * margin_;

  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = p.drift_px * (p.sections - 1);
  auto place = [&](double radius, bool dark, double length) {
    const double reach = radius + span + length / 2.0 + 4.0;
    const double lo = static_cast<double>(margin_) + reach;
    const double hx = static_cast<double>(margin_ + cw) - reach;
    const double hy = static_cast<double>(margin_ + ch) - reach;
    if (hx <= lo || hy <= lo) return;
    for (int attempt = 0; attempt < 500; ++attempt) {
      Profile pr;
      pr.radius = radius;
      pr.dark = dark;
      pr.drift = {p.drift_px * (2 * unit(rng) - 1), p.drift_px * (2 * unit(rng) - 1)};
      const Vec2d c{lo + (hx - lo) * unit(rng), lo + (hy - lo) * unit(rng)};
      const double angle = 2.0 * std::acos(-1.0) * unit(rng);
      const Vec2d half{0.5 * length * std::cos(angle), 0.5 * length * std::sin(angle)};
      pr.a = {c.x - half.x, c.y - half.y};
      pr.b = {c.x + half.x, c.y + half.y};
      const bool ok = std::all_of(profiles_.begin(), profiles_.end(),
                                  [&](const Profile& o) { return clear_of(pr, o, p.sections, 8.0); });
      if (ok) {
        profiles_.push_back(pr);
        return;
      }
    }
  };
  auto neurite_radius = [&] { return p.neurite_radius_min + (p.neurite_radius_max - p.neurite_radius_min) * unit(rng); };
  if (p.vessel) place(p.vessel_radius, true, 0.0);
  for (int i = 0; i < p.lateral_neurites; ++i) place(neurite_radius(), false, p.lateral_length);
  for (int i = 0; i < p.neurites; ++i) place(neurite_radius(), false, 0.0);
}

workflow::DatasetConfig EmSimulator::config() const {
  workflow::DatasetConfig c;
  c.name = params_.name;
  c.rows = params_.rows;
  c.cols = params_.cols;
  c.tile_width = params_.tile_width;
  c.tile_height = params_.tile_height;
  c.nominal_overlap_frac = params_.overlap_frac;
  c.voxel_size = params_.voxel_size;
  return c;
}

volume::GrayImage EmSimulator::world_section(std::int64_t section) const {
  const auto shared = textured_image(world_w_, world_h_, params_.seed * 1000003ULL);
  const auto own = textured_image(world_w_, world_h_, params_.seed * 1000003ULL + 1 + static_cast<std::uint64_t>(section));
  volume::GrayImage out(world_w_, world_h_);
  for (std::int64_t y = 0; y < world_h_; ++y)
    for (std::int64_t x = 0; x < world_w_; ++x) {
      const double t = (0.7 * shared(x, y) + 0.3 * own(x, y)) / 255.0;
      double v = 80.0 + 90.0 * t;
      for (const auto& pr : profiles_) {
        if (pr.distance({static_cast<double>(x), static_cast<double>(y)}, section) <= pr.radius) {
          v = pr.dark ? 5.0 + 30.0 * t : 205.0 + 45.0 * t;
        }
      }
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return out;
}

std::vector<volume::TileOffset> EmSimulator::tile_positions(std::int64_t section) const {
  const auto& p = params_;
  std::mt19937_64 rng(p.seed * 7919ULL + static_cast<std::uint64_t>(section));
  std::uniform_int_distribution<int> stage(-p.stage_jitter_px, p.stage_jitter_px);
  std::uniform_int_distribution<int> tile(-p.tile_jitter_px, p.tile_jitter_px);
  const std::int64_t sx = stage(rng), sy = stage(rng);
  const std::int64_t step_x = p.tile_width - overlap_px(p.overlap_frac, p.tile_width);
  const std::int64_t step_y = p.tile_height - overlap_px(p.overlap_frac, p.tile_height);
  std::vector<volume::TileOffset> out;
  for (int r = 0; r < p.rows; ++r)
    for (int c = 0; c < p.cols; ++c) {
      std::int64_t jx = 0, jy = 0;
      if (r != 0 || c != 0) {
        jx = tile(rng);
        jy = tile(rng);
      }
      out.push_back({margin_ + sx + c * step_x + jx, margin_ + sy + r * step_y + jy});
    }
  return out;
}

volume::SectionManifest EmSimulator::acquire(const workflow::DatasetLayout& layout, std::int64_t section) const {
  const auto dir = layout.section_dir(section);
  fs::create_directories(dir);
  const auto world = world_section(section);
  const auto positions = tile_positions(section);
  volume::SectionManifest m;
  m.section_index = section;
  m.rows = params_.rows;
  m.cols = params_.cols;
  m.nominal_overlap_frac = params_.overlap_frac;
  for (int r = 0; r < params_.rows; ++r)
    for (int c = 0; c < params_.cols; ++c) {
      const auto& pos = positions[static_cast<std::size_t>(r * params_.cols + c)];
      const std::string name = "tile_" + std::to_string(r) + "_" + std::to_string(c) + ".png";
      volume::write_png(dir / name, crop(world, pos.x, pos.y, params_.tile_width, params_.tile_height));
      m.tile_paths.emplace_back(name);
    }
  const auto tmp = dir / "manifest.json.tmp";
  volume::save_section_manifest(tmp, m);
  fs::rename(tmp, layout.section_manifest(section));
  return m;
}

workflow::DatasetLayout generate_em_dataset(const fs::path& root, const EmDatasetParams& params) {
  const EmSimulator sim(params);
  auto layout = workflow::create_dataset(root, sim.config());
  for (int s = 0; s < params.sections; ++s) sim.acquire(layout, s);
  return layout;
}

}  // namespace emflow::sim
