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

#include "emflow/imageops/elastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emflow::imageops {
namespace {

double pixel_or_zero(const GrayImage& im, std::int64_t x, std::int64_t y) {
  return im.contains(x, y) ? static_cast<double>(im(x, y)) : 0.0;
}

struct Spring {
  std::size_t i, j;
  double rest;
};

std::vector<Spring> intra_springs(const SpringMesh& m) {
  std::vector<Spring> out;
  const double s = m.rest_spacing, d = m.rest_spacing * std::sqrt(2.0);
  for (std::int64_t r = 0; r < m.rows; ++r) {
    for (std::int64_t c = 0; c < m.cols; ++c) {
      const auto i = m.index(c, r);
      if (c + 1 < m.cols) out.push_back({i, m.index(c + 1, r), s});
      if (r + 1 < m.rows) out.push_back({i, m.index(c, r + 1), s});
      if (c + 1 < m.cols && r + 1 < m.rows) out.push_back({i, m.index(c + 1, r + 1), d});
      if (c > 0 && r + 1 < m.rows) out.push_back({i, m.index(c - 1, r + 1), d});
    }
  }
  return out;
}

double energy_of(const SpringMesh& m, const std::vector<Spring>& springs, const std::vector<Vec2d>& pos) {
  double e = 0.0;
  for (const auto& sp : springs) {
    const Vec2d d = pos[sp.i] - pos[sp.j];
    const double len = std::hypot(d.x, d.y);
    e += m.intra_stiffness * (len - sp.rest) * (len - sp.rest);
  }
  for (const auto& cl : m.cross_links) {
    const Vec2d d = pos[cl.node] - cl.target;
    e += cl.stiffness * cl.confidence * (d.x * d.x + d.y * d.y);
  }
  return e;
}

std::vector<Vec2d> gradient_of(const SpringMesh& m, const std::vector<Spring>& springs,
                               const std::vector<Vec2d>& pos) {
  std::vector<Vec2d> g(pos.size());
  for (const auto& sp : springs) {
    const Vec2d d = pos[sp.i] - pos[sp.j];
    const double len = std::hypot(d.x, d.y);
    if (len == 0.0) continue;
    const double f = 2.0 * m.intra_stiffness * (len - sp.rest) / len;
    g[sp.i] = g[sp.i] + f * d;
    g[sp.j] = g[sp.j] - f * d;
  }
  for (const auto& cl : m.cross_links) {
    g[cl.node] = g[cl.node] + (2.0 * cl.stiffness * cl.confidence) * (pos[cl.node] - cl.target);
  }
  return g;
}

bool finite(Vec2d v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

Vec2d DisplacementField::node_position(std::int64_t c, std::int64_t r) const {
  return {static_cast<double>(c * grid_spacing + grid_spacing / 2),
          static_cast<double>(r * grid_spacing + grid_spacing / 2)};
}

DisplacementField block_match_field(const GrayImage& section_a, const GrayImage& section_b,
                                    const BlockMatchParams& params) {
  if (params.grid_spacing < 1 || params.patch_radius < 1 || params.search_radius < 0) {
    throw InvalidArgument("block matching needs grid_spacing >= 1, patch_radius >= 1, search_radius >= 0");
  }
  const std::int64_t W = std::max(section_a.width(), section_b.width());
  const std::int64_t H = std::max(section_a.height(), section_b.height());
  DisplacementField f;
  f.grid_spacing = params.grid_spacing;
  f.cols = ceil_div(W, params.grid_spacing);
  f.rows = ceil_div(H, params.grid_spacing);
  f.vectors.assign(static_cast<std::size_t>(f.cols * f.rows), {});
  f.confidence.assign(f.vectors.size(), 0.0);

  const std::int64_t pr = params.patch_radius, R = params.search_radius;
  const std::int64_t side = 2 * pr + 1;
  const double n = static_cast<double>(side * side);
  std::vector<double> pb(static_cast<std::size_t>(side * side));

  for (std::int64_t r = 0; r < f.rows; ++r) {
    for (std::int64_t c = 0; c < f.cols; ++c) {
      const auto node = f.node_position(c, r);
      const auto px = static_cast<std::int64_t>(node.x), py = static_cast<std::int64_t>(node.y);
      double sb = 0, sbb = 0;
      bool any = false;
      for (std::int64_t oy = -pr; oy <= pr; ++oy) {
        for (std::int64_t ox = -pr; ox <= pr; ++ox) {
          const double v = pixel_or_zero(section_b, px + ox, py + oy);
          pb[static_cast<std::size_t>((oy + pr) * side + ox + pr)] = v;
          sb += v;
          sbb += v * v;
          any = any || v != 0.0;
        }
      }
      const double var_b = sbb - sb * sb / n;
      if (!any || var_b <= 1e-6 * n) continue;

      std::int64_t best_vx = 0, best_vy = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::int64_t vy = -R; vy <= R; ++vy) {
        for (std::int64_t vx = -R; vx <= R; ++vx) {
          double sa = 0, saa = 0, sab = 0;
          for (std::int64_t oy = -pr; oy <= pr; ++oy) {
            const std::int64_t ay = py + oy - vy;
            const double* rowb = &pb[static_cast<std::size_t>((oy + pr) * side)];
            for (std::int64_t ox = -pr; ox <= pr; ++ox) {
              const double a = pixel_or_zero(section_a, px + ox - vx, ay);
              sa += a;
              saa += a * a;
              sab += a * rowb[ox + pr];
            }
          }
          const double var_a = saa - sa * sa / n;
          const double score =
              var_a <= 1e-6 * n ? 0.0 : std::clamp((sab - sa * sb / n) / std::sqrt(var_a * var_b), -1.0, 1.0);
          const std::int64_t d2 = vx * vx + vy * vy, bd2 = best_vx * best_vx + best_vy * best_vy;
          if (score > best || (score == best && d2 < bd2)) {
            best = score;
            best_vx = vx;
            best_vy = vy;
          }
        }
      }
      const auto idx = f.index(c, r);
      f.vectors[idx] = {static_cast<double>(best_vx), static_cast<double>(best_vy)};
      f.confidence[idx] = std::max(0.0, best);
    }
  }
  return f;
}

double mean_residual(const DisplacementField& field, double min_confidence) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < field.vectors.size(); ++i) {
    if (field.confidence[i] < min_confidence) continue;
    sum += std::hypot(field.vectors[i].x, field.vectors[i].y);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

SpringMesh SpringMesh::regular(std::int64_t cols, std::int64_t rows, double spacing, Vec2d origin,
                               double intra_stiffness) {
  SpringMesh m;
  m.cols = cols;
  m.rows = rows;
  m.rest_spacing = spacing;
  m.intra_stiffness = intra_stiffness;
  m.origin = origin;
  m.validate();
  m.nodes.resize(static_cast<std::size_t>(cols * rows));
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) m.nodes[m.index(c, r)] = m.rest_position(c, r);
  return m;
}

SpringMesh SpringMesh::for_field(const DisplacementField& field, double intra_stiffness) {
  return regular(field.cols, field.rows, static_cast<double>(field.grid_spacing), field.node_position(0, 0),
                 intra_stiffness);
}

Vec2d SpringMesh::rest_position(std::int64_t c, std::int64_t r) const {
  return {origin.x + static_cast<double>(c) * rest_spacing, origin.y + static_cast<double>(r) * rest_spacing};
}

void SpringMesh::validate() const {
  if (cols < 1 || rows < 1) throw InvalidArgument("spring mesh needs at least one node");
  if (!(rest_spacing > 0.0)) throw InvalidArgument("rest_spacing must be positive");
  if (!(intra_stiffness > 0.0)) throw InvalidArgument("intra_stiffness must be positive");
  if (!nodes.empty() && nodes.size() != static_cast<std::size_t>(cols * rows)) {
    throw InvalidArgument("spring mesh node count does not match its grid");
  }
  for (const auto& cl : cross_links) {
    if (cl.node >= static_cast<std::size_t>(cols * rows)) throw InvalidArgument("cross link names a missing node");
    if (!(cl.stiffness > 0.0)) throw InvalidArgument("cross link stiffness must be positive");
    if (!(cl.confidence >= 0.0 && cl.confidence <= 1.0)) throw InvalidArgument("confidence must be in [0,1]");
  }
}

Vec2d SpringMesh::displacement_at(Vec2d p) const {
  const double gx = std::clamp((p.x - origin.x) / rest_spacing, 0.0, static_cast<double>(cols - 1));
  const double gy = std::clamp((p.y - origin.y) / rest_spacing, 0.0, static_cast<double>(rows - 1));
  const auto c0 = std::min(static_cast<std::int64_t>(gx), cols - 1);
  const auto r0 = std::min(static_cast<std::int64_t>(gy), rows - 1);
  const auto c1 = std::min(c0 + 1, cols - 1), r1 = std::min(r0 + 1, rows - 1);
  const double fx = gx - static_cast<double>(c0), fy = gy - static_cast<double>(r0);
  auto disp = [&](std::int64_t c, std::int64_t r) { return nodes[index(c, r)] - rest_position(c, r); };
  const Vec2d top = (1 - fx) * disp(c0, r0) + fx * disp(c1, r0);
  const Vec2d bottom = (1 - fx) * disp(c0, r1) + fx * disp(c1, r1);
  return (1 - fy) * top + fy * bottom;
}

Vec2d SpringMesh::forward(Vec2d p) const { return p + displacement_at(p); }

double mesh_energy(const SpringMesh& mesh) {
  mesh.validate();
  return energy_of(mesh, intra_springs(mesh), mesh.nodes);
}

RelaxResult relax_spring_mesh(SpringMesh mesh, const RelaxParams& params) {
  if (!(params.step > 0.0)) throw InvalidArgument("relaxation step must be positive");
  if (params.max_iters < 0) throw InvalidArgument("max_iters must be >= 0");
  mesh.validate();
  for (const auto& p : mesh.nodes) {
    if (!finite(p)) throw InvalidArgument("spring mesh holds non-finite node positions");
  }
  for (const auto& cl : mesh.cross_links) {
    if (!finite(cl.target)) throw InvalidArgument("spring mesh holds non-finite cross-link targets");
  }
  const auto springs = intra_springs(mesh);
  RelaxResult out;
  double energy = energy_of(mesh, springs, mesh.nodes);
  out.energies.push_back(energy);
  std::vector<Vec2d> trial(mesh.nodes.size());
  for (int it = 0; it < params.max_iters; ++it) {
    const auto grad = gradient_of(mesh, springs, mesh.nodes);
    double step = params.step;
    double trial_energy = energy;
    double max_move = 0.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      max_move = 0.0;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        const Vec2d move = step * grad[i];
        trial[i] = mesh.nodes[i] - move;
        max_move = std::max(max_move, std::hypot(move.x, move.y));
      }
      trial_energy = energy_of(mesh, springs, trial);
      if (!std::isfinite(trial_energy)) throw Error("spring mesh relaxation diverged");
      if (trial_energy <= energy) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    mesh.nodes.swap(trial);
    energy = trial_energy;
    out.energies.push_back(energy);
    out.iterations = it + 1;
    if (max_move < params.eps) {
      out.converged = true;
      break;
    }
  }
  out.mesh = std::move(mesh);
  return out;
}

GrayImage render_aligned(const GrayImage& section, const SpringMesh& mesh) {
  mesh.validate();
  GrayImage out(section.width(), section.height());
  const double max_x = static_cast<double>(section.width() - 1);
  const double max_y = static_cast<double>(section.height() - 1);
  for (std::int64_t y = 0; y < out.height(); ++y) {
    for (std::int64_t x = 0; x < out.width(); ++x) {
      const Vec2d target{static_cast<double>(x), static_cast<double>(y)};
      // Fixed-point inversion of forward(s) = s + u(s) = target.
      Vec2d s = target - mesh.displacement_at(target);
      for (int k = 0; k < 20; ++k) {
        const Vec2d next = target - mesh.displacement_at(s);
        const double change = std::abs(next.x - s.x) + std::abs(next.y - s.y);
        s = next;
        if (change < 1e-4) break;
      }
      if (!(s.x >= 0.0 && s.y >= 0.0 && s.x <= max_x && s.y <= max_y)) continue;
      const auto x0 = static_cast<std::int64_t>(s.x), y0 = static_cast<std::int64_t>(s.y);
      const auto x1 = std::min(x0 + 1, section.width() - 1), y1 = std::min(y0 + 1, section.height() - 1);
      const double fx = s.x - static_cast<double>(x0), fy = s.y - static_cast<double>(y0);
      const double top = (1 - fx) * section(x0, y0) + fx * section(x1, y0);
      const double bottom = (1 - fx) * section(x0, y1) + fx * section(x1, y1);
      const double v = (1 - fy) * top + fy * bottom;
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

SpringMesh mesh_from_field(const DisplacementField& field, const SpringMesh& previous, const AlignParams& params) {
  auto mesh = SpringMesh::for_field(field, params.intra_stiffness);
  for (std::int64_t r = 0; r < field.rows; ++r) {
    for (std::int64_t c = 0; c < field.cols; ++c) {
      const auto i = field.index(c, r);
      if (field.confidence[i] <= 0.0) continue;
      const Vec2d g = mesh.rest_position(c, r);
      mesh.cross_links.push_back(
          {mesh.index(c, r), previous.forward(g - field.vectors[i]), params.cross_stiffness, field.confidence[i]});
    }
  }
  return mesh;
}

StackAlignment align_from_fields(std::int64_t width, std::int64_t height, const std::vector<DisplacementField>& fields,
                                 const AlignParams& params) {
  StackAlignment out;
  const std::int64_t s = params.match.grid_spacing;
  SpringMesh identity = SpringMesh::regular(ceil_div(width, s), ceil_div(height, s), static_cast<double>(s),
                                            {static_cast<double>(s / 2), static_cast<double>(s / 2)},
                                            params.intra_stiffness);
  out.meshes.push_back(identity);
  out.energies.emplace_back();
  for (const auto& field : fields) {
    auto relaxed = relax_spring_mesh(mesh_from_field(field, out.meshes.back(), params), params.relax);
    out.meshes.push_back(std::move(relaxed.mesh));
    out.energies.push_back(std::move(relaxed.energies));
  }
  return out;
}

StackAlignment align_stack(const std::vector<GrayImage>& sections, const AlignParams& params) {
  if (sections.empty()) return {};
  std::vector<DisplacementField> fields;
  for (std::size_t i = 1; i < sections.size(); ++i) {
    fields.push_back(block_match_field(sections[i - 1], sections[i], params.match));
  }
  return align_from_fields(sections.front().width(), sections.front().height(), fields, params);
}

void to_json(nlohmann::json& j, const DisplacementField& f) {
  nlohmann::json vectors = nlohmann::json::array();
  for (const auto& v : f.vectors) vectors.push_back({v.x, v.y});
  j = {{"grid_spacing", f.grid_spacing}, {"cols", f.cols}, {"rows", f.rows}, {"vectors", vectors},
       {"confidence", f.confidence}};
}

void from_json(const nlohmann::json& j, DisplacementField& f) {
  f.grid_spacing = j.at("grid_spacing").get<std::int64_t>();
  f.cols = j.at("cols").get<std::int64_t>();
  f.rows = j.at("rows").get<std::int64_t>();
  f.vectors.clear();
  for (const auto& v : j.at("vectors")) f.vectors.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  f.confidence = j.at("confidence").get<std::vector<double>>();
  const auto n = static_cast<std::size_t>(f.cols * f.rows);
  if (f.vectors.size() != n || f.confidence.size() != n) throw InvalidArgument("displacement field size mismatch");
}

}  // namespace emflow::imageops
