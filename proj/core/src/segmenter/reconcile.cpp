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

#include "emflow/segmenter/reconcile.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "emflow/segmenter/subvolume.hpp"

namespace emflow::segmenter {
using nlohmann::json;

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // keep the smaller node as root
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

void check_single_grid(const std::vector<LabeledSubvolume>& parts) {
  const auto& first = parts.front().first;
  Vec3i vol{0, 0, 0};
  for (const auto& [spec, labels] : parts) {
    if (labels.dims() != spec.dims) {
      throw InvalidArgument("subvolume " + to_string(spec.index) + " label dims " + to_string(labels.dims()) +
                            " differ from its spec dims " + to_string(spec.dims));
    }
    if (spec.overlap != first.overlap || spec.dims != first.dims) {
      throw InvalidArgument("subvolume specs do not share one cube size and overlap");
    }
    for (int a = 0; a < 3; ++a) vol[a] = std::max(vol[a], spec.end()[a]);
  }
  Vec3i cube = first.dims;
  for (int a = 0; a < 3; ++a) {
    // a cube clipped to the volume behaves like any cube at least that long
    if (cube[a] == vol[a]) cube[a] = std::max(cube[a], first.overlap[a] + 1);
  }
  std::vector<SubvolumeSpec> expected;
  try {
    expected = generate_grid(vol, cube, first.overlap);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("subvolume specs are not from one grid: ") + e.what());
  }
  for (auto& e : expected) e.dims = first.dims;
  if (expected.size() != parts.size()) {
    throw InvalidArgument("expected " + std::to_string(expected.size()) + " subvolumes for volume " + to_string(vol) +
                          ", got " + std::to_string(parts.size()));
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!(expected[i] == parts[i].first)) {
      throw InvalidArgument("subvolume " + to_string(parts[i].first.index) + " at " +
                            to_string(parts[i].first.offset) + " does not match the grid position " +
                            to_string(expected[i].offset));
    }
  }
}

std::vector<std::uint32_t> distinct_labels(const LabelGrid& g) {
  std::vector<std::uint32_t> out(g.data().begin(), g.data().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!out.empty() && out.front() == 0) out.erase(out.begin());
  return out;
}

}  // namespace

void to_json(json& j, const MergeGraph& g) {
  json nodes = json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    nodes.push_back(
        {{"subvolume", g.nodes[i].subvolume}, {"label", g.nodes[i].label}, {"global_id", g.global_ids[i]}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"a", json::array({e.a.subvolume, e.a.label})},
                     {"b", json::array({e.b.subvolume, e.b.label})},
                     {"agreement", e.agreement},
                     {"overlap_region", e.overlap_region},
                     {"merged", e.merged}});
  }
  json regions = json::array();
  for (const auto& [a, b] : g.regions) regions.push_back(json::array({a, b}));
  j = json{{"subvolumes", g.subvolumes}, {"nodes", nodes}, {"edges", edges}, {"regions", regions}};
}

Reconciled reconcile(std::vector<LabeledSubvolume> parts, const MergeParams& params) {
  if (parts.empty()) throw InvalidArgument("reconcile needs at least one subvolume");
  if (!(params.merge_frac >= 0.0 && params.merge_frac <= 1.0)) throw InvalidArgument("merge_frac must be in [0,1]");
  std::sort(parts.begin(), parts.end(),
            [](const LabeledSubvolume& a, const LabeledSubvolume& b) { return a.first.index < b.first.index; });
  check_single_grid(parts);

  Reconciled out;
  auto& graph = out.graph;
  for (const auto& p : parts) graph.subvolumes.push_back(p.first);

  // node ids: per subvolume, a sorted label list and the id of its first entry
  std::vector<std::vector<std::uint32_t>> labels_of(parts.size());
  std::vector<std::size_t> first_node(parts.size());
  for (std::size_t s = 0; s < parts.size(); ++s) {
    labels_of[s] = distinct_labels(parts[s].second);
    first_node[s] = graph.nodes.size();
    for (auto l : labels_of[s]) graph.nodes.push_back({s, l});
  }
  auto node_id = [&](std::size_t s, std::uint32_t label) {
    const auto& ls = labels_of[s];
    return first_node[s] + static_cast<std::size_t>(std::lower_bound(ls.begin(), ls.end(), label) - ls.begin());
  };

  std::map<Vec3i, std::size_t> by_index;
  for (std::size_t s = 0; s < parts.size(); ++s) by_index[parts[s].first.index] = s;

  UnionFind uf(graph.nodes.size());
  for (std::size_t sa = 0; sa < parts.size(); ++sa) {
    for (int axis = 0; axis < 3; ++axis) {
      Vec3i ni = parts[sa].first.index;
      ni[axis] += 1;
      const auto it = by_index.find(ni);
      if (it == by_index.end()) continue;
      const std::size_t sb = it->second;
      const auto& A = parts[sa];
      const auto& B = parts[sb];
      Vec3i lo, hi;
      if (!intersect(A.first, B.first, lo, hi)) continue;
      const std::size_t region = graph.regions.size();
      graph.regions.emplace_back(sa, sb);

      std::unordered_map<std::uint32_t, std::uint64_t> count_a, count_b;
      std::unordered_map<std::uint64_t, std::uint64_t> pairs;
      for (std::int64_t z = lo.z; z < hi.z; ++z)
        for (std::int64_t y = lo.y; y < hi.y; ++y)
          for (std::int64_t x = lo.x; x < hi.x; ++x) {
            const auto la = A.second(x - A.first.offset.x, y - A.first.offset.y, z - A.first.offset.z);
            const auto lb = B.second(x - B.first.offset.x, y - B.first.offset.y, z - B.first.offset.z);
            if (la != 0) ++count_a[la];
            if (lb != 0) ++count_b[lb];
            if (la != 0 && lb != 0) ++pairs[(static_cast<std::uint64_t>(la) << 32) | lb];
          }
      std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted(pairs.begin(), pairs.end());
      std::sort(sorted.begin(), sorted.end());
      for (const auto& [key, agreement] : sorted) {
        const auto la = static_cast<std::uint32_t>(key >> 32), lb = static_cast<std::uint32_t>(key & 0xffffffffu);
        const double smaller = static_cast<double>(std::min(count_a[la], count_b[lb]));
        MergeEdge e{{sa, la}, {sb, lb}, agreement, region, false};
        e.merged = agreement >= params.merge_min_voxels &&
                   static_cast<double>(agreement) >= params.merge_frac * smaller;
        if (e.merged) uf.unite(node_id(sa, la), node_id(sb, lb));
        graph.edges.push_back(e);
      }
    }
  }

  // dense ids in ascending order of each class's smallest node
  graph.global_ids.assign(graph.nodes.size(), 0);
  std::vector<std::uint32_t> root_id(graph.nodes.size(), 0);
  std::uint32_t next = 0;
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    const auto r = uf.find(n);
    if (root_id[r] == 0) root_id[r] = ++next;
    graph.global_ids[n] = root_id[r];
  }

  Vec3i vol{0, 0, 0};
  for (const auto& p : parts)
    for (int a = 0; a < 3; ++a) vol[a] = std::max(vol[a], p.first.end()[a]);
  out.labels = LabelGrid(vol, parts.front().second.voxel_size());
  std::vector<std::uint8_t> written(out.labels.size(), 0);
  for (std::size_t s = 0; s < parts.size(); ++s) {
    const auto& [spec, local] = parts[s];
    // local label -> global id, through the sorted label list
    std::unordered_map<std::uint32_t, std::uint32_t> to_global;
    for (std::size_t k = 0; k < labels_of[s].size(); ++k) to_global[labels_of[s][k]] = graph.global_ids[first_node[s] + k];
    for (std::int64_t z = 0; z < spec.dims.z; ++z)
      for (std::int64_t y = 0; y < spec.dims.y; ++y)
        for (std::int64_t x = 0; x < spec.dims.x; ++x) {
          const auto gi = out.labels.index(spec.offset.x + x, spec.offset.y + y, spec.offset.z + z);
          if (written[gi]) continue;
          written[gi] = 1;
          const auto l = local(x, y, z);
          out.labels[gi] = l == 0 ? 0 : to_global[l];
        }
  }
  return out;
}

LabelGrid canonical_labels(const LabelGrid& labels) {
  LabelGrid out(labels.dims(), labels.voxel_size());
  std::unordered_map<std::uint32_t, std::uint32_t> map;
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = labels[i];
    if (l == 0) continue;
    auto [it, inserted] = map.try_emplace(l, 0);
    if (inserted) it->second = ++next;
    out[i] = it->second;
  }
  return out;
}

}  // namespace emflow::segmenter
