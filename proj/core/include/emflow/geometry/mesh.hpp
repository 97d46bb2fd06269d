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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "emflow/volume/grid.hpp"

namespace emflow::geometry {

using volume::LabelGrid;

/// Triangle mesh in nanometers.
struct Mesh {
  std::vector<Vec3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::uint32_t object_id = 0;

  bool empty() const { return faces.empty(); }
  /// Checks face indices and rejects faces with repeated vertices.
  void validate() const;
  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Marching cubes on the binary mask `labels == object_id`.
///
/// Cells span eight neighbouring voxel centers; vertices sit halfway along
/// cell edges whose ends differ, at voxel index times `voxel_size`. Shared
/// cell edges share one vertex. Triangles wind counter-clockwise seen from
/// outside the object. Objects touching the volume boundary stay open there.
Mesh marching_cubes(const LabelGrid& labels, std::uint32_t object_id, Vec3d voxel_size);

/// One mesh per nonzero label present.
std::map<std::uint32_t, Mesh> mesh_all(const LabelGrid& labels, Vec3d voxel_size);

double surface_area(const Mesh& mesh);
/// Signed enclosed volume; positive for closed outward-wound meshes.
double signed_volume(const Mesh& mesh);

struct EdgeStats {
  std::size_t edges = 0;
  std::size_t boundary_edges = 0;  // used by one face
  std::size_t nonmanifold_edges = 0;  // used by more than two faces
};
EdgeStats edge_stats(const Mesh& mesh);
/// V - E + F.
std::int64_t euler_characteristic(const Mesh& mesh);

/// OBJ text with an `o <object_id>` line and 1-based face indices.
void export_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh import_mesh(const std::filesystem::path& path);

}  // namespace emflow::geometry
