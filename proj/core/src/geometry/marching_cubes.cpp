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
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "emflow/geometry/mesh.hpp"

namespace emflow::geometry {
namespace {

struct CubeEdge {
  int a, b;  // corners, b = a + (1 << axis)
  int axis;
};

// Corner c has offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
constexpr std::array<CubeEdge, 12> make_edges() {
  std::array<CubeEdge, 12> e{};
  int n = 0;
  for (int axis = 0; axis < 3; ++axis)
    for (int c = 0; c < 8; ++c)
      if (!(c & (1 << axis))) e[static_cast<std::size_t>(n++)] = {c, c | (1 << axis), axis};
  return e;
}
constexpr auto kEdges = make_edges();

using Point = std::array<double, 3>;

Point corner_point(int c) { return {double(c & 1), double((c >> 1) & 1), double((c >> 2) & 1)}; }
Point edge_mid(int e) {
  const auto p = corner_point(kEdges[static_cast<std::size_t>(e)].a);
  auto q = p;
  q[static_cast<std::size_t>(kEdges[static_cast<std::size_t>(e)].axis)] += 0.5;
  return q;
}

using Triangles = std::vector<std::array<int, 3>>;

bool share_face(int e1, int e2) {
  const auto &a = kEdges[static_cast<std::size_t>(e1)], &b = kEdges[static_cast<std::size_t>(e2)];
  for (int axis = 0; axis < 3; ++axis) {
    if (axis == a.axis || axis == b.axis) continue;
    if (((a.a >> axis) & 1) == ((b.a >> axis) & 1)) return true;
  }
  return false;
}

// Builds the triangle list of one corner configuration from its face
// contours. Each face's contour depends only on that face's corners (on
// faces with two diagonal inside corners, each inside corner is cut off
// separately), so neighbouring cells agree on the shared face and the
// surface closes up.
Triangles build_case(int mask) {
  auto inside = [mask](int c) { return (mask >> c) & 1; };
  std::array<int, 12> next;
  next.fill(-1);
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Point n{0, 0, 0};
      n[static_cast<std::size_t>(axis)] = side ? 1.0 : -1.0;
      std::vector<int> crossed;
      std::vector<int> face_inside;
      for (int e = 0; e < 12; ++e) {
        const auto& ce = kEdges[static_cast<std::size_t>(e)];
        if (((ce.a >> axis) & 1) != side || ((ce.b >> axis) & 1) != side) continue;
        if (inside(ce.a) != inside(ce.b)) crossed.push_back(e);
      }
      for (int c = 0; c < 8; ++c)
        if (((c >> axis) & 1) == side && inside(c)) face_inside.push_back(c);
      std::vector<std::pair<int, int>> segments;
      auto shared_corner = [](int e1, int e2) {
        const auto &a = kEdges[static_cast<std::size_t>(e1)], &b = kEdges[static_cast<std::size_t>(e2)];
        for (int c : {a.a, a.b})
          if (c == b.a || c == b.b) return c;
        return -1;
      };
      if (crossed.size() == 2) {
        segments.emplace_back(crossed[0], crossed[1]);
      } else if (crossed.size() == 4) {
        for (int c : face_inside) {
          std::vector<int> at;
          for (int e : crossed) {
            const auto& ce = kEdges[static_cast<std::size_t>(e)];
            if (ce.a == c || ce.b == c) at.push_back(e);
          }
          segments.emplace_back(at[0], at[1]);
        }
      }
      for (auto [e1, e2] : segments) {
        const auto p = edge_mid(e1), q = edge_mid(e2);
        const Point d{q[0] - p[0], q[1] - p[1], q[2] - p[2]};
        const Point w{d[1] * n[2] - d[2] * n[1], d[2] * n[0] - d[0] * n[2], d[0] * n[1] - d[1] * n[0]};
        const int sc = shared_corner(e1, e2);
        const int ref = sc >= 0 ? sc : face_inside.front();
        const double sign = inside(ref) ? 1.0 : -1.0;
        const auto r = corner_point(ref);
        const double dot = w[0] * (r[0] - p[0]) + w[1] * (r[1] - p[1]) + w[2] * (r[2] - p[2]);
        if (dot * sign < 0) std::swap(e1, e2);
        if (next[static_cast<std::size_t>(e1)] != -1) throw std::logic_error("inconsistent contour orientation");
        next[static_cast<std::size_t>(e1)] = e2;
      }
    }
  }
  Triangles tris;
  std::array<bool, 12> used{};
  for (int start = 0; start < 12; ++start) {
    if (next[static_cast<std::size_t>(start)] < 0 || used[static_cast<std::size_t>(start)]) continue;
    std::vector<int> loop;
    for (int e = start; !used[static_cast<std::size_t>(e)]; e = next[static_cast<std::size_t>(e)]) {
      used[static_cast<std::size_t>(e)] = true;
      loop.push_back(e);
    }
    // A fan diagonal between two vertices of one cube face could also be
    // produced by the neighbouring cell, so start the fan where it has none.
    const std::size_t n = loop.size();
    std::size_t start_at = n;
    for (std::size_t s = 0; s < n && start_at == n; ++s) {
      bool clean = true;
      for (std::size_t i = 2; i + 1 < n && clean; ++i) clean = !share_face(loop[s], loop[(s + i) % n]);
      if (clean) start_at = s;
    }
    if (start_at == n) throw std::logic_error("no face-safe fan for marching cubes case " + std::to_string(mask));
    for (std::size_t i = 1; i + 1 < n; ++i) {
      tris.push_back({loop[start_at], loop[(start_at + i) % n], loop[(start_at + i + 1) % n]});
    }
  }
  return tris;
}

const std::array<Triangles, 256>& case_table() {
  static const auto table = [] {
    std::array<Triangles, 256> t;
    for (int m = 0; m < 256; ++m) t[static_cast<std::size_t>(m)] = build_case(m);
    return t;
  }();
  return table;
}

struct Box {
  Vec3i lo, hi;  // inclusive voxel bounds
};

Mesh march(const LabelGrid& labels, std::uint32_t id, Vec3d vs, const Box& box) {
  Mesh mesh;
  mesh.object_id = id;
  const auto& d = labels.dims();
  const auto& table = case_table();
  std::unordered_map<std::uint64_t, std::uint32_t> vertex_of;
  auto vertex = [&](std::int64_t x, std::int64_t y, std::int64_t z, int e) {
    const auto& ce = kEdges[static_cast<std::size_t>(e)];
    const std::int64_t px = x + (ce.a & 1), py = y + ((ce.a >> 1) & 1), pz = z + ((ce.a >> 2) & 1);
    const auto key = static_cast<std::uint64_t>(labels.index(px, py, pz)) * 3 + static_cast<std::uint64_t>(ce.axis);
    auto [it, inserted] = vertex_of.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (inserted) {
      Vec3d p{static_cast<double>(px), static_cast<double>(py), static_cast<double>(pz)};
      if (ce.axis == 0) p.x += 0.5;
      if (ce.axis == 1) p.y += 0.5;
      if (ce.axis == 2) p.z += 0.5;
      mesh.vertices.push_back({p.x * vs.x, p.y * vs.y, p.z * vs.z});
    }
    return it->second;
  };
  const Vec3i lo{std::max<std::int64_t>(0, box.lo.x - 1), std::max<std::int64_t>(0, box.lo.y - 1),
                 std::max<std::int64_t>(0, box.lo.z - 1)};
  const Vec3i hi{std::min(d.x - 2, box.hi.x), std::min(d.y - 2, box.hi.y), std::min(d.z - 2, box.hi.z)};
  for (std::int64_t z = lo.z; z <= hi.z; ++z)
    for (std::int64_t y = lo.y; y <= hi.y; ++y)
      for (std::int64_t x = lo.x; x <= hi.x; ++x) {
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          if (labels(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1)) == id) mask |= 1 << c;
        }
        for (const auto& t : table[static_cast<std::size_t>(mask)]) {
          mesh.faces.push_back({vertex(x, y, z, t[0]), vertex(x, y, z, t[1]), vertex(x, y, z, t[2])});
        }
      }
  return mesh;
}

void check_voxel_size(Vec3d vs) {
  if (!(vs.x > 0 && vs.y > 0 && vs.z > 0)) throw InvalidArgument("voxel_size components must be > 0");
}

}  // namespace

Mesh marching_cubes(const LabelGrid& labels, std::uint32_t object_id, Vec3d voxel_size) {
  if (object_id == 0) throw InvalidArgument("object_id must be > 0");
  check_voxel_size(voxel_size);
  const auto& d = labels.dims();
  Box box{{d.x, d.y, d.z}, {-1, -1, -1}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != object_id) continue;
    const auto c = labels.coord(i);
    for (int a = 0; a < 3; ++a) {
      box.lo[a] = std::min(box.lo[a], c[a]);
      box.hi[a] = std::max(box.hi[a], c[a]);
    }
  }
  if (box.hi.x < 0) {
    Mesh m;
    m.object_id = object_id;
    return m;
  }
  return march(labels, object_id, voxel_size, box);
}

std::map<std::uint32_t, Mesh> mesh_all(const LabelGrid& labels, Vec3d voxel_size) {
  check_voxel_size(voxel_size);
  std::map<std::uint32_t, Box> boxes;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = labels[i];
    if (l == 0) continue;
    const auto c = labels.coord(i);
    auto [it, inserted] = boxes.try_emplace(l, Box{c, c});
    if (inserted) continue;
    for (int a = 0; a < 3; ++a) {
      it->second.lo[a] = std::min(it->second.lo[a], c[a]);
      it->second.hi[a] = std::max(it->second.hi[a], c[a]);
    }
  }
  std::map<std::uint32_t, Mesh> out;
  for (const auto& [id, box] : boxes) out.emplace(id, march(labels, id, voxel_size, box));
  return out;
}

}  // namespace emflow::geometry
