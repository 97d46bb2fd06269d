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

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/volume/grid.hpp"

namespace emflow::segmenter {

using volume::GrayGrid;
using volume::LabelGrid;

enum class ProbabilitySource { external, synthetic, intensity_proxy };

std::string source_name(ProbabilitySource s);

/// Probabilities stored as gray8: 0 -> 0.0, 255 -> 1.0.
struct ProbabilityMap {
  GrayGrid grid;
  ProbabilitySource source = ProbabilitySource::external;

  static double to_probability(std::uint8_t v) { return static_cast<double>(v) / 255.0; }
};

enum class SeedKind { cell_body, vessel, neurite };

std::string seed_kind_name(SeedKind k);
SeedKind parse_seed_kind(const std::string& name);

struct Seed {
  Vec3i position;
  std::optional<std::uint32_t> label;
  std::optional<SeedKind> kind;

  friend bool operator==(const Seed&, const Seed&) = default;
};

using SeedList = std::vector<Seed>;

/// Checks coordinates against `dims` and that explicit labels are unique
/// and nonzero.
void validate_seeds(const SeedList& seeds, Vec3i dims);

void to_json(nlohmann::json& j, const Seed& s);
void from_json(const nlohmann::json& j, Seed& s);

/// `{"seeds": [...]}` document.
nlohmann::json seeds_to_json(const SeedList& seeds);
SeedList seeds_from_json(const nlohmann::json& j);

/// One cube of an overlapped subvolume grid.
struct SubvolumeSpec {
  Vec3i index;
  Vec3i offset;
  Vec3i dims;
  Vec3i overlap;

  Vec3i end() const { return offset + dims; }
  friend bool operator==(const SubvolumeSpec&, const SubvolumeSpec&) = default;
};

void to_json(nlohmann::json& j, const SubvolumeSpec& s);
void from_json(const nlohmann::json& j, SubvolumeSpec& s);

}  // namespace emflow::segmenter
