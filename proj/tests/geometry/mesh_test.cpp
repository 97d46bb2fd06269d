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
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "emflow/geometry/mesh.hpp"
#include "test_util.hpp"

using namespace emflow;
using namespace emflow::geometry;
using emflow::testing::TempDir;

namespace {

LabelGrid ball(std::int64_t n, double r, Vec3d c) {
  LabelGrid g({n, n, n});
  for (std::int64_t z = 0; z < n; ++z)
    for (std::int64_t y = 0; y < n; ++y)
      for (std::int64_t x = 0; x < n; ++x)
        if ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) + (z - c.z) * (z - c.z) <= r * r) g(x, y, z) = 1;
  return g;
}

bool watertight(const Mesh& m) {
  const auto s = edge_stats(m);
  return s.boundary_edges == 0 && s.nonmanifold_edges == 0 && s.edges > 0;
}

}  // namespace

TEST_CASE("empty mask gives an empty mesh") {
  LabelGrid g({5, 5, 5});
  const auto m = marching_cubes(g, 3, {1, 1, 1});
  CHECK(m.vertices.empty());
  CHECK(m.faces.empty());
  CHECK(m.object_id == 3);
  CHECK_THROWS_AS(marching_cubes(g, 0, {1, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(marching_cubes(g, 1, {0, 1, 1}), InvalidArgument);
}

TEST_CASE("single interior voxel is a closed octahedron") {
  LabelGrid g({3, 3, 3});
  g(1, 1, 1) = 7;
  const auto m = marching_cubes(g, 7, {1, 1, 1});
  m.validate();
  CHECK(m.vertices.size() == 6);
  CHECK(m.faces.size() == 8);
  CHECK(watertight(m));
  CHECK(euler_characteristic(m) == 2);
  CHECK(signed_volume(m) == doctest::Approx(4.0 / 3.0 * 0.125));
}

TEST_CASE("digital ball of radius 10") {
  const auto g = ball(25, 10, {12, 12, 12});
  const auto m = marching_cubes(g, 1, {1, 1, 1});
  m.validate();
  CHECK(watertight(m));
  CHECK(euler_characteristic(m) == 2);
  const double sphere = 4 * std::numbers::pi * 100;
  const double area = surface_area(m);
  CAPTURE(area);
  CHECK(std::abs(area - sphere) <= 0.15 * sphere);
  CHECK(signed_volume(m) > 0);
  for (const auto& v : m.vertices) {
    CHECK(v.x >= 1);
    CHECK(v.x <= 23);
  }
}

TEST_CASE("random interior objects are watertight and stay near their voxels") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    LabelGrid g({10, 9, 8});
    std::bernoulli_distribution on(trial % 2 ? 0.5 : 0.25);
    for (std::int64_t z = 1; z < 7; ++z)
      for (std::int64_t y = 1; y < 8; ++y)
        for (std::int64_t x = 1; x < 9; ++x)
          if (on(rng)) g(x, y, z) = 2;
    const Vec3d vs{2.0, 3.0, 5.0};
    const auto m = marching_cubes(g, 2, vs);
    CAPTURE(trial);
    m.validate();
    CHECK(watertight(m));
    CHECK(signed_volume(m) > 0);
    for (const auto& v : m.vertices) {
      CHECK(v.x >= 0.0);
      CHECK(v.x <= 9.0 * vs.x);
      CHECK(v.z <= 7.0 * vs.z);
    }
  }
}

TEST_CASE("voxel size scales vertices") {
  const auto g = ball(9, 3, {4, 4, 4});
  const auto unit = marching_cubes(g, 1, {1, 1, 1});
  const auto scaled = marching_cubes(g, 1, {4, 4, 40});
  REQUIRE(unit.vertices.size() == scaled.vertices.size());
  CHECK(unit.faces == scaled.faces);
  for (std::size_t i = 0; i < unit.vertices.size(); ++i) {
    CHECK(scaled.vertices[i].x == 4 * unit.vertices[i].x);
    CHECK(scaled.vertices[i].z == 40 * unit.vertices[i].z);
  }
}

TEST_CASE("objects touching the volume boundary are left open") {
  LabelGrid g({4, 4, 4});
  for (std::int64_t y = 0; y < 4; ++y)
    for (std::int64_t z = 0; z < 4; ++z) g(0, y, z) = 1;
  const auto m = marching_cubes(g, 1, {1, 1, 1});
  CHECK_FALSE(m.empty());
  CHECK(edge_stats(m).boundary_edges > 0);
}

TEST_CASE("mesh_all meshes every label") {
  LabelGrid g({20, 10, 10});
  for (std::int64_t x = 2; x < 6; ++x) g(x, 4, 4) = 1;
  for (std::int64_t x = 12; x < 16; ++x) g(x, 5, 5) = 2;
  const auto meshes = mesh_all(g, {1, 1, 1});
  REQUIRE(meshes.size() == 2);
  CHECK(meshes.count(1) == 1);
  CHECK(meshes.count(2) == 1);
  double max1 = -1e9, min2 = 1e9;
  for (const auto& v : meshes.at(1).vertices) max1 = std::max(max1, v.x);
  for (const auto& v : meshes.at(2).vertices) min2 = std::min(min2, v.x);
  CHECK(max1 < min2);
  CHECK(meshes.at(1) == marching_cubes(g, 1, {1, 1, 1}));
  CHECK(mesh_all(LabelGrid({4, 4, 4}), {1, 1, 1}).empty());
}

TEST_CASE("OBJ export and import") {
  TempDir dir("mesh");
  const auto m = marching_cubes(ball(9, 3, {4, 4, 4}), 1, {4.1, 4.1, 39.7});
  export_mesh(m, dir / "a.obj");
  CHECK(import_mesh(dir / "a.obj") == m);

  std::ifstream in(dir / "a.obj");
  std::string line;
  std::uint32_t min_index = ~0u, max_index = 0;
  while (std::getline(in, line)) {
    if (line.rfind("f ", 0) != 0) continue;
    std::istringstream ss(line.substr(2));
    std::uint32_t a;
    while (ss >> a) {
      min_index = std::min(min_index, a);
      max_index = std::max(max_index, a);
    }
  }
  CHECK(min_index == 1);
  CHECK(max_index == m.vertices.size());

  Mesh empty;
  empty.object_id = 4;
  export_mesh(empty, dir / "e.obj");
  CHECK(import_mesh(dir / "e.obj") == empty);
  CHECK_THROWS_AS(export_mesh(m, dir / "missing" / "x.obj"), Error);
  CHECK_THROWS_AS(import_mesh(dir / "nope.obj"), NotFound);
  {
    std::ofstream bad(dir / "bad.obj");
    bad << "v 1 2\n";
  }
  CHECK_THROWS_AS(import_mesh(dir / "bad.obj"), InvalidArgument);
}
