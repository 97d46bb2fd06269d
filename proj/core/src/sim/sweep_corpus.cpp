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

#include "emflow/sim/sweep_corpus.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "emflow/imageops/ncc.hpp"
#include "emflow/sim/texture.hpp"
#include "emflow/volume/png_io.hpp"
#include "emflow/volume/section.hpp"

namespace emflow::sim {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void normalize(FloatImage& img) {
  double s = 0, ss = 0;
  for (float v : img.data()) {
    s += v;
    ss += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(img.size());
  const double mean = s / n;
  const double sd = std::sqrt(std::max(1e-12, ss / n - mean * mean));
  for (float& v : img.data()) v = static_cast<float>((v - mean) / sd);
}

FloatImage block_noise(std::int64_t w, std::int64_t h, std::int64_t block, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  const auto bw = ceil_div(w, block), bh = ceil_div(h, block);
  std::vector<float> cells(static_cast<std::size_t>(bw * bh));
  for (auto& c : cells) c = normal(rng);
  FloatImage out(w, h);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) out(x, y) = cells[static_cast<std::size_t>((y / block) * bw + x / block)];
  return out;
}

GrayImage compose(const FloatImage& pattern, Vec2d p_at, const FloatImage& noise, Vec2d n_at, std::int64_t size,
                  double sp, double sn) {
  GrayImage out(size, size);
  const auto px = static_cast<std::int64_t>(p_at.x), py = static_cast<std::int64_t>(p_at.y);
  const auto nx = static_cast<std::int64_t>(n_at.x), ny = static_cast<std::int64_t>(n_at.y);
  for (std::int64_t y = 0; y < size; ++y)
    for (std::int64_t x = 0; x < size; ++x) {
      const double v = 128.0 + sp * pattern(x + px, y + py) + sn * noise(x + nx, y + ny);
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  return out;
}

}  // namespace

std::string tier_name(CorpusTier t) {
  switch (t) {
    case CorpusTier::easy: return "easy";
    case CorpusTier::decoy0: return "decoy0";
    case CorpusTier::decoy1: return "decoy1";
    case CorpusTier::decoy2: return "decoy2";
    case CorpusTier::slip: return "slip";
  }
  return "?";
}

void SweepCorpusParams::validate() const {
  if (easy_sections < 0 || sections_per_tier < 0 || slip_sections < 0) {
    throw InvalidArgument("section counts must be >= 0");
  }
  if (easy_sections + 3 * sections_per_tier + slip_sections == 0) throw InvalidArgument("corpus has no sections");
  if (tile_size < 256 || tile_size % 16 != 0) throw InvalidArgument("tile_size must be a multiple of 16, >= 256");
  if (!(overlap_frac > 0.0 && overlap_frac < 0.5)) throw InvalidArgument("overlap_frac must be in (0, 0.5)");
  if (decoy_px < 1 || decoy_px > tile_size / 10) throw InvalidArgument("decoy_px must be in [1, tile_size/10]");
  if (!(pattern_sigma > 0 && noise_ratio > 0 && pattern_cell_px > 0)) {
    throw InvalidArgument("pattern_sigma, noise_ratio and pattern_cell_px must be positive");
  }
}

bool expected_failure(CorpusTier tier, std::int64_t tile_size, std::int64_t max_octave_px) {
  switch (tier) {
    case CorpusTier::easy: return false;
    case CorpusTier::slip: return true;
    default: break;
  }
  const int k = tier == CorpusTier::decoy0 ? 0 : tier == CorpusTier::decoy1 ? 1 : 2;
  // the noise is resolved when the finest searched level is at most k
  int finest = 0;
  while (ceil_div(tile_size, std::int64_t{1} << finest) > max_octave_px && (tile_size >> finest) > 1) ++finest;
  return finest > k;
}

std::vector<CorpusSection> generate_sweep_corpus(const fs::path& root, const SweepCorpusParams& params) {
  params.validate();
  const std::int64_t n = params.tile_size;
  workflow::DatasetConfig cfg;
  cfg.name = params.name;
  cfg.rows = 1;
  cfg.cols = 2;
  cfg.tile_width = n;
  cfg.tile_height = n;
  cfg.nominal_overlap_frac = params.overlap_frac;
  auto layout = workflow::create_dataset(root, cfg);

  std::vector<CorpusSection> sections;
  auto add = [&](CorpusTier t, int count) {
    for (int i = 0; i < count; ++i) sections.push_back({static_cast<std::int64_t>(sections.size()), t});
  };
  add(CorpusTier::easy, params.easy_sections);
  add(CorpusTier::decoy0, params.sections_per_tier);
  add(CorpusTier::decoy1, params.sections_per_tier);
  add(CorpusTier::decoy2, params.sections_per_tier);
  add(CorpusTier::slip, params.slip_sections);

  const auto [nom_x, nom_y] = imageops::nominal_position(n, n, imageops::Relation::right_of, params.overlap_frac);
  const std::int64_t world_w = 2 * n + 16, world_h = n + params.decoy_px + 16;
  const double sp = params.pattern_sigma, sn = params.pattern_sigma * std::sqrt(params.noise_ratio);
  std::mt19937_64 rng(params.seed);
  json truth = json::array();
  for (const auto& sec : sections) {
    const auto s = rng();
    auto pattern = value_noise(world_w, world_h, s, {{params.pattern_cell_px, 1.0}});
    normalize(pattern);
    std::int64_t block = 1;
    if (sec.tier == CorpusTier::decoy1) block = 2;
    if (sec.tier == CorpusTier::decoy2) block = 4;
    const auto noise = block_noise(world_w, world_h, block, s ^ 0x9e3779b97f4a7c15ULL);
    // offsets on the 4 px grid keep every noise block whole at each level
    std::uniform_int_distribution<std::int64_t> jitter(0, 7);
    const auto snap = [](std::int64_t v) { return v - v % 4; };
    Vec2d t{static_cast<double>(snap(nom_x + jitter(rng))), static_cast<double>(snap(nom_y + jitter(rng)))};
    if (sec.tier == CorpusTier::slip) t.y += static_cast<double>(params.decoy_px);
    const bool decoy = sec.tier != CorpusTier::easy && sec.tier != CorpusTier::slip;
    const Vec2d d = decoy ? Vec2d{t.x, t.y + static_cast<double>(params.decoy_px)} : t;

    const auto dir = layout.section_dir(sec.index);
    fs::create_directories(dir);
    volume::write_png(dir / "tile_0_0.png", compose(pattern, {0, 0}, noise, {0, 0}, n, sp, sn));
    volume::write_png(dir / "tile_0_1.png", compose(pattern, d, noise, t, n, sp, sn));
    volume::SectionManifest m;
    m.section_index = sec.index;
    m.rows = 1;
    m.cols = 2;
    m.nominal_overlap_frac = params.overlap_frac;
    m.tile_paths = {"tile_0_0.png", "tile_0_1.png"};
    volume::save_section_manifest(layout.section_manifest(sec.index), m);
    truth.push_back({{"section", sec.index}, {"tier", tier_name(sec.tier)}, {"true_offset", {t.x, t.y}}});
  }
  std::ofstream(root / "corpus.json") << json{{"tile_size", n}, {"sections", truth}}.dump(2) << '\n';
  return sections;
}

}  // namespace emflow::sim
