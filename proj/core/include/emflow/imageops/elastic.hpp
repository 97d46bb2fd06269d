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

#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/volume/grid.hpp"

namespace emflow::imageops {

using volume::FloatImage;
using volume::GrayImage;

/// Per-node displacements on a regular grid whose node (c, r) sits at pixel
/// (c*spacing + spacing/2, r*spacing + spacing/2). A vector v at node p means
/// section_b(p) looks like section_a(p - v).
struct DisplacementField {
  std::int64_t grid_spacing = 64;
  std::int64_t cols = 0;
  std::int64_t rows = 0;
  std::vector<Vec2d> vectors;
  std::vector<double> confidence;  // in [0, 1]

  std::size_t index(std::int64_t c, std::int64_t r) const { return static_cast<std::size_t>(r * cols + c); }
  Vec2d node_position(std::int64_t c, std::int64_t r) const;
};

struct BlockMatchParams {
  std::int64_t grid_spacing = 64;
  std::int64_t patch_radius = 24;
  std::int64_t search_radius = 12;
};

void to_json(nlohmann::json& j, const DisplacementField& f);
void from_json(const nlohmann::json& j, DisplacementField& f);

/// NCC block matching of section_b patches against section_a at integer
/// shifts. Pixels outside either image read as 0. Ties go to the shortest
/// vector.
DisplacementField block_match_field(const GrayImage& section_a, const GrayImage& section_b,
                                    const BlockMatchParams& params);

/// Mean |v| over nodes whose confidence is at least `min_confidence`.
double mean_residual(const DisplacementField& field, double min_confidence = 0.3);

struct CrossLink {
  std::size_t node = 0;
  Vec2d target;
  double stiffness = 1.0;
  double confidence = 1.0;
};

/// Deformable grid. Node (c, r) rests at origin + (c, r) * rest_spacing;
/// `nodes` holds where each rest point is carried by the deformation.
struct SpringMesh {
  std::int64_t cols = 0;
  std::int64_t rows = 0;
  double rest_spacing = 64.0;
  double intra_stiffness = 1.0;
  Vec2d origin;
  std::vector<Vec2d> nodes;
  std::vector<CrossLink> cross_links;

  /// Mesh with every node at rest and no cross links.
  static SpringMesh regular(std::int64_t cols, std::int64_t rows, double spacing, Vec2d origin,
                            double intra_stiffness = 1.0);
  /// Regular mesh whose nodes coincide with the field's grid nodes.
  static SpringMesh for_field(const DisplacementField& field, double intra_stiffness = 1.0);

  std::size_t index(std::int64_t c, std::int64_t r) const { return static_cast<std::size_t>(r * cols + c); }
  Vec2d rest_position(std::int64_t c, std::int64_t r) const;
  void validate() const;

  /// Deformation of an arbitrary point: p + bilinear interpolation of node
  /// displacements, held constant beyond the outermost nodes.
  Vec2d forward(Vec2d p) const;
  Vec2d displacement_at(Vec2d p) const;
};

/// E = sum_intra k (|d| - rest)^2 + sum_cross k c |node - target|^2 with
/// 4-neighbour springs (rest s) and diagonal springs (rest s*sqrt(2)).
double mesh_energy(const SpringMesh& mesh);

struct RelaxParams {
  int max_iters = 1000;
  double step = 0.1;
  double eps = 0.01;
};

struct RelaxResult {
  SpringMesh mesh;
  std::vector<double> energies;  // energies[0] is the input energy
  int iterations = 0;
  bool converged = false;
};

/// Batch gradient descent. A step that would raise the energy is halved
/// until it does not, so the energy trace never increases. Stops when the
/// largest node movement falls under eps or after max_iters.
RelaxResult relax_spring_mesh(SpringMesh mesh, const RelaxParams& params);

/// Renders the section in the deformed frame: output pixel x samples the
/// section at the point s with forward(s) = x, bilinearly; samples outside
/// the section are 0.
GrayImage render_aligned(const GrayImage& section, const SpringMesh& mesh);

struct AlignParams {
  BlockMatchParams match;
  double intra_stiffness = 1.0;
  double cross_stiffness = 1.0;
  RelaxParams relax;
};

/// Mesh for section b whose cross links pull node g toward prev(g - v(g)),
/// where v is the raw b-vs-a field and prev is section a's deformation.
SpringMesh mesh_from_field(const DisplacementField& field, const SpringMesh& previous, const AlignParams& params);

struct StackAlignment {
  std::vector<SpringMesh> meshes;  // meshes[0] is the identity
  std::vector<std::vector<double>> energies;
};

/// Chains precomputed fields (fields[k] matches section k to k + 1) from
/// the identity mesh of a width x height section.
StackAlignment align_from_fields(std::int64_t width, std::int64_t height, const std::vector<DisplacementField>& fields,
                                 const AlignParams& params);

/// Aligns every section to section 0 by matching consecutive pairs and
/// relaxing each section's mesh in turn.
StackAlignment align_stack(const std::vector<GrayImage>& sections, const AlignParams& params);

}  // namespace emflow::imageops
