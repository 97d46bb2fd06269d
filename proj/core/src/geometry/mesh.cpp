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

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "emflow/geometry/mesh.hpp"

namespace emflow::geometry {
namespace {

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

Vec3d sub(Vec3d a, Vec3d b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3d cross(Vec3d a, Vec3d b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }

std::unordered_map<std::uint64_t, std::size_t> edge_use(const Mesh& m) {
  std::unordered_map<std::uint64_t, std::size_t> use;
  for (const auto& f : m.faces) {
    for (int k = 0; k < 3; ++k) {
      auto a = f[static_cast<std::size_t>(k)], b = f[static_cast<std::size_t>((k + 1) % 3)];
      if (a > b) std::swap(a, b);
      ++use[(static_cast<std::uint64_t>(a) << 32) | b];
    }
  }
  return use;
}

}  // namespace

void Mesh::validate() const {
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto& f = faces[i];
    for (auto v : f) {
      if (v >= vertices.size()) {
        throw InvalidArgument("face " + std::to_string(i) + " references vertex " + std::to_string(v) + " of " +
                              std::to_string(vertices.size()));
      }
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) throw InvalidArgument("face " + std::to_string(i) + " is degenerate");
  }
}

double surface_area(const Mesh& m) {
  double area = 0;
  for (const auto& f : m.faces) {
    const auto c = cross(sub(m.vertices[f[1]], m.vertices[f[0]]), sub(m.vertices[f[2]], m.vertices[f[0]]));
    area += 0.5 * std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z);
  }
  return area;
}

double signed_volume(const Mesh& m) {
  double v = 0;
  for (const auto& f : m.faces) {
    const auto& a = m.vertices[f[0]];
    const auto c = cross(m.vertices[f[1]], m.vertices[f[2]]);
    v += a.x * c.x + a.y * c.y + a.z * c.z;
  }
  return v / 6.0;
}

EdgeStats edge_stats(const Mesh& m) {
  EdgeStats s;
  for (const auto& [key, n] : edge_use(m)) {
    ++s.edges;
    if (n == 1) ++s.boundary_edges;
    if (n > 2) ++s.nonmanifold_edges;
  }
  return s;
}

std::int64_t euler_characteristic(const Mesh& m) {
  return static_cast<std::int64_t>(m.vertices.size()) - static_cast<std::int64_t>(edge_stats(m).edges) +
         static_cast<std::int64_t>(m.faces.size());
}

void export_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  mesh.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh to " + path.string());
  out << "o " << mesh.object_id << '\n';
  for (const auto& v : mesh.vertices) out << "v " << shortest(v.x) << ' ' << shortest(v.y) << ' ' << shortest(v.z) << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  out.flush();
  if (!out) throw Error("failed writing mesh to " + path.string());
}

Mesh import_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("mesh file not found: " + path.string());
  Mesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag.empty() || tag[0] == '#') continue;
    bool ok = true;
    if (tag == "o") {
      ok = static_cast<bool>(ss >> mesh.object_id);
    } else if (tag == "v") {
      std::string t[3];
      ok = static_cast<bool>(ss >> t[0] >> t[1] >> t[2]);
      double c[3] = {0, 0, 0};
      for (int k = 0; ok && k < 3; ++k) {
        const auto r = std::from_chars(t[k].data(), t[k].data() + t[k].size(), c[k]);
        ok = r.ec == std::errc{} && r.ptr == t[k].data() + t[k].size();
      }
      mesh.vertices.push_back({c[0], c[1], c[2]});
    } else if (tag == "f") {
      std::int64_t a = 0, b = 0, c = 0;
      ok = static_cast<bool>(ss >> a >> b >> c) && a >= 1 && b >= 1 && c >= 1;
      mesh.faces.push_back({static_cast<std::uint32_t>(a - 1), static_cast<std::uint32_t>(b - 1),
                            static_cast<std::uint32_t>(c - 1)});
    }
    if (!ok) throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": malformed OBJ line");
  }
  mesh.validate();
  return mesh;
}

}  // namespace emflow::geometry
