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
#include <cmath>
#include <limits>
#include <queue>

#include "emflow/geometry/distance.hpp"
#include "emflow/geometry/skeleton.hpp"

namespace emflow::geometry {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEpsilon = 1e-3;

struct Step {
  std::int64_t dx, dy, dz;
  double length;
};

class Object {
 public:
  Object(const volume::LabelGrid& labels, std::uint32_t id, Vec3d vs) : vs_(vs) {
    const auto& d = labels.dims();
    Vec3i lo{d.x, d.y, d.z}, hi{-1, -1, -1};
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != id) continue;
      const auto c = labels.coord(i);
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], c[a]);
        hi[a] = std::max(hi[a], c[a]);
      }
    }
    if (hi.x < 0) throw NotFound("object " + std::to_string(id) + " is not present in the label volume");
    origin_ = lo;
    mask_ = volume::Grid3<std::uint8_t>(hi - lo + Vec3i{1, 1, 1});
    const auto& m = mask_.dims();
    for (std::int64_t z = 0; z < m.z; ++z)
      for (std::int64_t y = 0; y < m.y; ++y)
        for (std::int64_t x = 0; x < m.x; ++x)
          mask_(x, y, z) = labels(lo.x + x, lo.y + y, lo.z + z) == id ? 1 : 0;
    dbf_ = distance_to_background(mask_, vs);
    max_dbf_ = *std::max_element(dbf_.begin(), dbf_.end());
    for (std::int64_t dz = -1; dz <= 1; ++dz)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          steps_.push_back({dx, dy, dz, std::sqrt(double(dx * dx) * vs.x * vs.x + double(dy * dy) * vs.y * vs.y +
                                                  double(dz * dz) * vs.z * vs.z)});
        }
  }

  std::size_t size() const { return mask_.size(); }
  bool in(std::size_t i) const { return mask_[i] != 0; }
  double dbf(std::size_t i) const { return dbf_[i]; }
  double max_dbf() const { return max_dbf_; }

  Vec3d position(std::size_t i) const {
    const auto c = mask_.coord(i);
    return {double(origin_.x + c.x) * vs_.x, double(origin_.y + c.y) * vs_.y, double(origin_.z + c.z) * vs_.z};
  }
  double distance(std::size_t a, std::size_t b) const {
    const auto p = position(a), q = position(b);
    return std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z));
  }

  // Dijkstra over 26-connected object voxels; step cost = length * cost(v).
  template <class Cost>
  std::vector<double> shortest(std::size_t src, Cost cost, std::vector<std::int64_t>* parent) const {
    std::vector<double> dist(size(), kInf);
    if (parent) parent->assign(size(), -1);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[src] = 0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[u]) continue;
      const auto c = mask_.coord(u);
      for (const auto& s : steps_) {
        const std::int64_t x = c.x + s.dx, y = c.y + s.dy, z = c.z + s.dz;
        if (!mask_.contains(x, y, z)) continue;
        const auto v = mask_.index(x, y, z);
        if (!in(v)) continue;
        const double nd = du + s.length * cost(v);
        if (nd < dist[v]) {
          dist[v] = nd;
          if (parent) (*parent)[v] = static_cast<std::int64_t>(u);
          heap.emplace(nd, v);
        }
      }
    }
    return dist;
  }

  // Calls f on every object voxel within `radius` of voxel i.
  template <class F>
  void for_each_within(std::size_t i, double radius, F f) const {
    const auto c = mask_.coord(i);
    const std::int64_t rx = static_cast<std::int64_t>(radius / vs_.x), ry = static_cast<std::int64_t>(radius / vs_.y),
                       rz = static_cast<std::int64_t>(radius / vs_.z);
    const auto& m = mask_.dims();
    for (std::int64_t z = std::max<std::int64_t>(0, c.z - rz); z <= std::min(m.z - 1, c.z + rz); ++z)
      for (std::int64_t y = std::max<std::int64_t>(0, c.y - ry); y <= std::min(m.y - 1, c.y + ry); ++y)
        for (std::int64_t x = std::max<std::int64_t>(0, c.x - rx); x <= std::min(m.x - 1, c.x + rx); ++x) {
          const auto j = mask_.index(x, y, z);
          if (in(j) && distance(i, j) <= radius) f(j);
        }
  }

 private:
  Vec3d vs_;
  Vec3i origin_;
  volume::Grid3<std::uint8_t> mask_;
  std::vector<double> dbf_;
  double max_dbf_ = 0;
  std::vector<Step> steps_;
};

std::size_t farthest(const std::vector<double>& dist, const std::vector<std::uint8_t>* visited) {
  std::size_t best = dist.size();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] == kInf || (visited && (*visited)[i])) continue;
    if (best == dist.size() || dist[i] > dist[best]) best = i;
  }
  return best;
}

// The most central reachable voxel whose invalidation ball covers t:
// largest DBF, then largest dist, then lowest index.
std::size_t centered(const Object& obj, std::size_t t, const std::vector<double>& dist, double factor) {
  std::size_t best = t;
  obj.for_each_within(t, factor * obj.max_dbf(), [&](std::size_t v) {
    if (dist[v] == kInf || factor * obj.dbf(v) < obj.distance(v, t)) return;
    const auto key = [&](std::size_t u) { return std::make_pair(obj.dbf(u), dist[u]); };
    if (key(v) > key(best) || (key(v) == key(best) && v < best)) best = v;
  });
  return best;
}

}  // namespace

void TeasarParams::validate() const {
  if (!(scale > 0 && exponent > 0 && invalidation_radius_factor > 0 && min_path_length > 0)) {
    throw InvalidArgument("TEASAR parameters must all be positive");
  }
}

Skeleton teasar_skeletonize(const volume::LabelGrid& labels, std::uint32_t object_id, const TeasarParams& params,
                            Vec3d voxel_size) {
  params.validate();
  if (!(voxel_size.x > 0 && voxel_size.y > 0 && voxel_size.z > 0)) {
    throw InvalidArgument("voxel_size components must be > 0");
  }
  const Object obj(labels, object_id, voxel_size);
  Skeleton skel;
  skel.object_id = object_id;
  std::vector<std::uint8_t> visited(obj.size(), 0);
  std::vector<std::int64_t> node_of(obj.size(), -1);
  const double max_dbf = obj.max_dbf();
  auto penalty = [&](std::size_t v) {
    return params.scale * std::pow(1.0 - obj.dbf(v) / max_dbf, params.exponent) + kEpsilon;
  };
  auto invalidate = [&](std::size_t p) {
    visited[p] = 1;
    obj.for_each_within(p, params.invalidation_radius_factor * obj.dbf(p), [&](std::size_t j) { visited[j] = 1; });
  };
  auto add_node = [&](std::size_t v) {
    node_of[v] = static_cast<std::int64_t>(skel.nodes.size());
    skel.nodes.push_back({obj.position(v), obj.dbf(v)});
  };

  // one tree per connected component
  for (std::size_t start = 0; start < obj.size(); ++start) {
    if (!obj.in(start) || visited[start]) continue;
    const auto from_start = obj.shortest(start, [](std::size_t) { return 1.0; }, nullptr);
    const auto root =
        centered(obj, farthest(from_start, nullptr), from_start, params.invalidation_radius_factor);
    const auto from_root = obj.shortest(root, [](std::size_t) { return 1.0; }, nullptr);
    std::vector<std::int64_t> parent;
    obj.shortest(root, penalty, &parent);
    add_node(root);
    invalidate(root);
    for (;;) {
      const auto far = farthest(from_root, &visited);
      if (far == from_root.size()) break;
      const auto target = centered(obj, far, from_root, params.invalidation_radius_factor);
      std::vector<std::size_t> path;
      double length = 0;
      auto v = target;
      while (node_of[v] < 0) {
        path.push_back(v);
        const auto p = static_cast<std::size_t>(parent[v]);
        length += obj.distance(v, p);
        v = p;
      }
      invalidate(far);
      for (auto p : path) invalidate(p);
      if (length < params.min_path_length) continue;
      // path runs target -> ... -> first voxel before the tree; attach in reverse
      auto prev = static_cast<std::uint32_t>(node_of[v]);
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        add_node(*it);
        const auto id = static_cast<std::uint32_t>(node_of[*it]);
        skel.edges.push_back({prev, id});
        prev = id;
      }
    }
  }
  return skel;
}

}  // namespace emflow::geometry
