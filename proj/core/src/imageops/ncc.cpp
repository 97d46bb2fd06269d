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

#include "emflow/imageops/ncc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace emflow::imageops {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div_signed(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

FloatImage halve(const FloatImage& in) {
  FloatImage out(ceil_div(in.width(), 2), ceil_div(in.height(), 2));
  for (std::int64_t y = 0; y < out.height(); ++y) {
    for (std::int64_t x = 0; x < out.width(); ++x) {
      float sum = 0.0f;
      int count = 0;
      for (std::int64_t yy = 2 * y; yy < std::min(in.height(), 2 * y + 2); ++yy) {
        for (std::int64_t xx = 2 * x; xx < std::min(in.width(), 2 * x + 2); ++xx) {
          sum += in(xx, yy);
          ++count;
        }
      }
      out(x, y) = sum / static_cast<float>(count);
    }
  }
  return out;
}

bool is_horizontal(Relation r) { return r == Relation::right_of || r == Relation::left_of; }

struct Candidate {
  std::int64_t x = 0;
  std::int64_t y = 0;
  double score = -std::numeric_limits<double>::infinity();
  std::int64_t dist2 = std::numeric_limits<std::int64_t>::max();
  bool valid = false;
};

// Strict preference used for the argmax: score, then nearness to nominal,
// then lexicographic (y, x).
bool better(const Candidate& c, const Candidate& best) {
  if (!best.valid) return true;
  if (c.score != best.score) return c.score > best.score;
  if (c.dist2 != best.dist2) return c.dist2 < best.dist2;
  if (c.y != best.y) return c.y < best.y;
  return c.x < best.x;
}

}  // namespace

void MontageParams::validate() const {
  if (!(min_octave_px > 0 && min_octave_px <= max_octave_px)) {
    throw InvalidArgument("octave bounds must satisfy 0 < min_octave_px <= max_octave_px");
  }
  if (!(nominal_overlap_frac > 0.0 && nominal_overlap_frac < 0.5)) {
    throw InvalidArgument("nominal_overlap_frac must be in (0, 0.5)");
  }
  if (!(search_margin_frac >= 0.0 && search_margin_frac < 0.5)) {
    throw InvalidArgument("search_margin_frac must be in [0, 0.5)");
  }
  if (!(ncc_accept_threshold >= -1.0 && ncc_accept_threshold <= 1.0)) {
    throw InvalidArgument("ncc_accept_threshold must be in [-1, 1]");
  }
}

std::string relation_name(Relation r) {
  switch (r) {
    case Relation::right_of: return "right_of";
    case Relation::below: return "below";
    case Relation::left_of: return "left_of";
    case Relation::above: return "above";
  }
  return "?";
}

Relation parse_relation(const std::string& name) {
  for (auto r : {Relation::right_of, Relation::below, Relation::left_of, Relation::above}) {
    if (relation_name(r) == name) return r;
  }
  throw InvalidArgument("unknown tile relation '" + name + "'");
}

std::pair<std::int64_t, std::int64_t> nominal_position(std::int64_t width, std::int64_t height,
                                                       Relation relation, double overlap_frac) {
  const std::int64_t ax = width - std::llround(overlap_frac * static_cast<double>(width));
  const std::int64_t ay = height - std::llround(overlap_frac * static_cast<double>(height));
  switch (relation) {
    case Relation::right_of: return {ax, 0};
    case Relation::left_of: return {-ax, 0};
    case Relation::below: return {0, ay};
    case Relation::above: return {0, -ay};
  }
  return {0, 0};
}

double overlap_ncc(const FloatImage& a, const FloatImage& b, std::int64_t px, std::int64_t py) {
  const std::int64_t x0 = std::max<std::int64_t>(0, px), x1 = std::min(a.width(), px + b.width());
  const std::int64_t y0 = std::max<std::int64_t>(0, py), y1 = std::min(a.height(), py + b.height());
  if (x1 <= x0 || y1 <= y0) return 0.0;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::int64_t y = y0; y < y1; ++y) {
    const float* ra = &a.data()[static_cast<std::size_t>(y * a.width())];
    const float* rb = &b.data()[static_cast<std::size_t>((y - py) * b.width() - px)];
    for (std::int64_t x = x0; x < x1; ++x) {
      const double va = ra[x], vb = rb[x];
      sa += va;
      sb += vb;
      saa += va * va;
      sbb += vb * vb;
      sab += va * vb;
    }
  }
  const double n = static_cast<double>((x1 - x0) * (y1 - y0));
  const double var_a = saa - sa * sa / n;
  const double var_b = sbb - sb * sb / n;
  constexpr double kMinVariance = 1e-6;
  if (var_a <= kMinVariance * n || var_b <= kMinVariance * n) return 0.0;
  const double cov = sab - sa * sb / n;
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

std::vector<FloatImage> box_pyramid(const GrayImage& image) {
  std::vector<FloatImage> levels;
  FloatImage base(image.width(), image.height());
  std::transform(image.data().begin(), image.data().end(), base.data().begin(),
                 [](std::uint8_t v) { return static_cast<float>(v); });
  levels.push_back(std::move(base));
  while (levels.back().width() > 1 || levels.back().height() > 1) levels.push_back(halve(levels.back()));
  return levels;
}

Displacement ncc_displacement(const GrayImage& tile_a, const GrayImage& tile_b, Relation relation,
                              const MontageParams& params) {
  params.validate();
  if (tile_a.width() != tile_b.width() || tile_a.height() != tile_b.height()) {
    throw InvalidArgument("ncc_displacement needs tiles of equal size");
  }
  const std::int64_t W = tile_a.width(), H = tile_a.height();
  const bool horiz = is_horizontal(relation);
  const std::int64_t along_len = horiz ? W : H;
  const std::int64_t across_len = horiz ? H : W;
  const auto [nom_x, nom_y] = nominal_position(W, H, relation, params.nominal_overlap_frac);
  const std::int64_t band = std::llround(params.nominal_overlap_frac * static_cast<double>(along_len));
  if (band < 1) throw InvalidArgument("nominal overlap band is empty for this tile size");
  const std::int64_t m_along = std::llround(params.search_margin_frac * static_cast<double>(along_len));
  const std::int64_t m_across = std::llround(params.search_margin_frac * static_cast<double>(across_len));
  const std::int64_t mx = horiz ? m_along : m_across;
  const std::int64_t my = horiz ? m_across : m_along;

  // Level widths w_l = ceil(W / 2^l). The finest admissible level is the
  // first one not wider than max_octave_px; the coarsest is the last one
  // still at least min_octave_px wide.
  auto width_at = [&](int l) { return ceil_div(W, std::int64_t{1} << l); };
  int finest = 0;
  while (width_at(finest) > params.max_octave_px && width_at(finest) > 1) ++finest;
  int coarsest = finest;
  while (width_at(coarsest + 1) >= params.min_octave_px && width_at(coarsest) > 1) ++coarsest;

  auto pa = box_pyramid(tile_a);
  auto pb = box_pyramid(tile_b);

  Displacement result;
  result.octave_used = width_at(finest);

  auto evaluate = [&](int level, std::int64_t cx, std::int64_t cy) {
    const std::int64_t s = std::int64_t{1} << level;
    Candidate c;
    c.x = cx;
    c.y = cy;
    // Require the along-axis overlap to keep at least half the nominal band.
    const std::int64_t along_pos = horiz ? cx : cy;
    const std::int64_t level_len = horiz ? pa[static_cast<std::size_t>(level)].width()
                                         : pa[static_cast<std::size_t>(level)].height();
    const double overlap = static_cast<double>(level_len - std::llabs(along_pos));
    if (overlap < std::max(1.0, static_cast<double>(band) / (2.0 * static_cast<double>(s)))) return c;
    c.valid = true;
    c.score = overlap_ncc(pa[static_cast<std::size_t>(level)], pb[static_cast<std::size_t>(level)], cx, cy);
    const std::int64_t ddx = cx * s - nom_x, ddy = cy * s - nom_y;
    c.dist2 = ddx * ddx + ddy * ddy;
    ++result.candidates_evaluated;
    return c;
  };

  auto window = [&](int level) {
    const std::int64_t s = std::int64_t{1} << level;
    return std::array<std::int64_t, 4>{floor_div(nom_x - mx, s), ceil_div_signed(nom_x + mx, s),
                                       floor_div(nom_y - my, s), ceil_div_signed(nom_y + my, s)};
  };

  Candidate best;
  {
    const auto w = window(coarsest);
    for (std::int64_t cy = w[2]; cy <= w[3]; ++cy) {
      for (std::int64_t cx = w[0]; cx <= w[1]; ++cx) {
        Candidate c = evaluate(coarsest, cx, cy);
        if (c.valid && better(c, best)) best = c;
      }
    }
  }
  if (!best.valid) throw InvalidArgument("search window holds no admissible overlap");

  for (int level = coarsest - 1; level >= finest; --level) {
    const auto w = window(level);
    Candidate next;
    for (std::int64_t cy = 2 * best.y - 1; cy <= 2 * best.y + 1; ++cy) {
      for (std::int64_t cx = 2 * best.x - 1; cx <= 2 * best.x + 1; ++cx) {
        if (cx < w[0] || cx > w[1] || cy < w[2] || cy > w[3]) continue;
        Candidate c = evaluate(level, cx, cy);
        if (c.valid && better(c, next)) next = c;
      }
    }
    if (!next.valid) {
      next = best;
      next.x *= 2;
      next.y *= 2;
    }
    best = next;
  }

  const std::int64_t s = std::int64_t{1} << finest;
  result.dx = best.x * s - nom_x;
  result.dy = best.y * s - nom_y;
  result.score = best.score;
  result.low_confidence = best.score < params.ncc_accept_threshold;
  return result;
}

}  // namespace emflow::imageops
