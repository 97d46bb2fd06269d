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

#include "emflow/segmenter/types.hpp"

#include <set>

namespace emflow::segmenter {
using nlohmann::json;

namespace {

json vec_json(Vec3i v) { return json::array({v.x, v.y, v.z}); }

Vec3i vec_from(const json& j) { return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>(), j.at(2).get<std::int64_t>()}; }

}  // namespace

std::string source_name(ProbabilitySource s) {
  switch (s) {
    case ProbabilitySource::external: return "external";
    case ProbabilitySource::synthetic: return "synthetic";
    case ProbabilitySource::intensity_proxy: return "intensity_proxy";
  }
  return "?";
}

std::string seed_kind_name(SeedKind k) {
  switch (k) {
    case SeedKind::cell_body: return "cell_body";
    case SeedKind::vessel: return "vessel";
    case SeedKind::neurite: return "neurite";
  }
  return "?";
}

SeedKind parse_seed_kind(const std::string& name) {
  for (auto k : {SeedKind::cell_body, SeedKind::vessel, SeedKind::neurite}) {
    if (seed_kind_name(k) == name) return k;
  }
  throw InvalidArgument("unknown seed kind '" + name + "'");
}

void validate_seeds(const SeedList& seeds, Vec3i dims) {
  std::set<std::uint32_t> labels;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& p = seeds[i].position;
    for (int a = 0; a < 3; ++a) {
      if (p[a] < 0 || p[a] >= dims[a]) {
        throw InvalidArgument("seed " + std::to_string(i) + " at " + to_string(p) + " lies outside the volume " +
                              to_string(dims));
      }
    }
    if (seeds[i].label) {
      if (*seeds[i].label == 0) throw InvalidArgument("seed " + std::to_string(i) + " uses reserved label 0");
      if (!labels.insert(*seeds[i].label).second) {
        throw InvalidArgument("seed label " + std::to_string(*seeds[i].label) + " is used twice");
      }
    }
  }
}

void to_json(json& j, const Seed& s) {
  j = json{{"x", s.position.x}, {"y", s.position.y}, {"z", s.position.z}};
  if (s.label) j["label"] = *s.label;
  if (s.kind) j["kind"] = seed_kind_name(*s.kind);
}

void from_json(const json& j, Seed& s) {
  s.position = {j.at("x").get<std::int64_t>(), j.at("y").get<std::int64_t>(), j.at("z").get<std::int64_t>()};
  s.label.reset();
  s.kind.reset();
  if (j.contains("label") && !j["label"].is_null()) s.label = j["label"].get<std::uint32_t>();
  if (j.contains("kind") && !j["kind"].is_null()) s.kind = parse_seed_kind(j["kind"].get<std::string>());
}

json seeds_to_json(const SeedList& seeds) { return json{{"seeds", seeds}}; }

SeedList seeds_from_json(const json& j) {
  if (!j.contains("seeds") || !j["seeds"].is_array()) throw InvalidArgument("seed document needs a 'seeds' array");
  return j["seeds"].get<SeedList>();
}

void to_json(json& j, const SubvolumeSpec& s) {
  j = json{{"index", vec_json(s.index)},
           {"offset", vec_json(s.offset)},
           {"dims", vec_json(s.dims)},
           {"overlap", vec_json(s.overlap)}};
}

void from_json(const json& j, SubvolumeSpec& s) {
  s.index = vec_from(j.at("index"));
  s.offset = vec_from(j.at("offset"));
  s.dims = vec_from(j.at("dims"));
  s.overlap = vec_from(j.at("overlap"));
}

}  // namespace emflow::segmenter
