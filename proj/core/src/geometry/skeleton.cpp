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

#include <cmath>
#include <fstream>
#include <numeric>

#include "emflow/geometry/skeleton.hpp"

namespace emflow::geometry {
using nlohmann::json;
namespace {

double dist(Vec3d a, Vec3d b) { return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z)); }

double point_segment_distance(Vec3d p, Vec3d a, Vec3d b) {
  const Vec3d ab{b.x - a.x, b.y - a.y, b.z - a.z}, ap{p.x - a.x, p.y - a.y, p.z - a.z};
  const double len2 = ab.x * ab.x + ab.y * ab.y + ab.z * ab.z;
  if (len2 == 0) return dist(p, a);
  const double t = std::clamp((ap.x * ab.x + ap.y * ab.y + ap.z * ab.z) / len2, 0.0, 1.0);
  return dist(p, {a.x + t * ab.x, a.y + t * ab.y, a.z + t * ab.z});
}

void douglas_peucker(const std::vector<Vec3d>& pts, std::size_t lo, std::size_t hi, double tol,
                     std::vector<bool>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1;
  std::size_t at = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
    // on ties prefer the point nearest the middle of the run
    const auto off_mid = [&](std::size_t k) { return std::abs(2.0 * double(k) - double(lo + hi)); };
    if (d > worst + 1e-9 || (std::abs(d - worst) <= 1e-9 && off_mid(i) < off_mid(at))) {
      worst = d;
      at = i;
    }
  }
  if (worst <= tol) return;
  keep[at] = true;
  douglas_peucker(pts, lo, at, tol, keep);
  douglas_peucker(pts, at, hi, tol, keep);
}

}  // namespace

std::vector<std::size_t> Skeleton::degrees() const {
  std::vector<std::size_t> deg(nodes.size(), 0);
  for (const auto& e : edges) {
    ++deg[e[0]];
    ++deg[e[1]];
  }
  return deg;
}

void Skeleton::validate() const {
  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& n : nodes) {
    if (!(n.radius >= 0)) throw InvalidArgument("skeleton node radius must be >= 0");
  }
  for (const auto& e : edges) {
    if (e[0] >= nodes.size() || e[1] >= nodes.size()) throw InvalidArgument("skeleton edge index out of range");
    const auto a = find(e[0]), b = find(e[1]);
    if (a == b) throw InvalidArgument("skeleton edges contain a cycle");
    parent[a] = b;
  }
}

Skeleton simplify_skeleton(const Skeleton& s, double tolerance) {
  if (!(tolerance >= 0)) throw InvalidArgument("simplify tolerance must be >= 0");
  s.validate();
  const auto deg = s.degrees();
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adj(s.nodes.size());  // (neighbour, edge)
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    adj[s.edges[e][0]].emplace_back(s.edges[e][1], e);
    adj[s.edges[e][1]].emplace_back(s.edges[e][0], e);
  }
  Skeleton out;
  out.object_id = s.object_id;
  std::vector<std::int64_t> new_id(s.nodes.size(), -1);
  auto keep_node = [&](std::uint32_t n) {
    if (new_id[n] < 0) {
      new_id[n] = static_cast<std::int64_t>(out.nodes.size());
      out.nodes.push_back(s.nodes[n]);
    }
    return static_cast<std::uint32_t>(new_id[n]);
  };
  std::vector<bool> edge_done(s.edges.size(), false);
  for (std::uint32_t n = 0; n < s.nodes.size(); ++n) {
    if (deg[n] == 2) continue;
    keep_node(n);
    for (auto [next, e] : adj[n]) {
      if (edge_done[e]) continue;
      std::vector<std::uint32_t> chain{n};
      auto prev = n;
      auto cur = next;
      edge_done[e] = true;
      while (deg[cur] == 2) {
        chain.push_back(cur);
        const auto& nb = adj[cur];
        const auto pick = nb[0].first == prev ? nb[1] : nb[0];
        edge_done[pick.second] = true;
        prev = cur;
        cur = pick.first;
      }
      chain.push_back(cur);
      std::vector<Vec3d> pts;
      for (auto c : chain) pts.push_back(s.nodes[c].position);
      std::vector<bool> keep(chain.size(), false);
      keep.front() = keep.back() = true;
      douglas_peucker(pts, 0, chain.size() - 1, tolerance, keep);
      std::uint32_t last = keep_node(chain.front());
      for (std::size_t i = 1; i < chain.size(); ++i) {
        if (!keep[i]) continue;
        const auto id = keep_node(chain[i]);
        out.edges.push_back({last, id});
        last = id;
      }
    }
  }
  return out;
}

void to_json(json& j, const Skeleton& s) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : s.nodes) nodes.push_back({n.position.x, n.position.y, n.position.z, n.radius});
  for (const auto& e : s.edges) edges.push_back({e[0], e[1]});
  j = json{{"object_id", s.object_id}, {"nodes", nodes}, {"edges", edges}};
}

void from_json(const json& j, Skeleton& s) {
  s = Skeleton{};
  s.object_id = j.value("object_id", 0u);
  for (const auto& n : j.at("nodes")) {
    if (n.size() != 4) throw InvalidArgument("skeleton node must be [x,y,z,r]");
    s.nodes.push_back({{n[0].get<double>(), n[1].get<double>(), n[2].get<double>()}, n[3].get<double>()});
  }
  for (const auto& e : j.at("edges")) {
    if (e.size() != 2) throw InvalidArgument("skeleton edge must be [a,b]");
    s.edges.push_back({e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>()});
  }
  s.validate();
}

void export_skeleton(const Skeleton& skeleton, const std::filesystem::path& path) {
  skeleton.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write skeleton to " + path.string());
  out << json(skeleton).dump() << '\n';
  out.flush();
  if (!out) throw Error("failed writing skeleton to " + path.string());
}

Skeleton import_skeleton(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("skeleton file not found: " + path.string());
  try {
    return json::parse(in).get<Skeleton>();
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed skeleton JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace emflow::geometry
