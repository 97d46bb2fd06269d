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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/workflow/dataset.hpp"

namespace emflow::sim {

/// Kind of a corpus section. A decoy section pairs a smooth pattern that
/// lines up at a false offset with block noise that lines up at the true
/// one. Coarse pyramid levels average the noise away and lock onto the
/// false offset; once the search refines down to a level that resolves the
/// noise blocks, the false match scores below the accept threshold and the
/// montage falls back to the nominal placement.
enum class CorpusTier {
  easy,    // consistent content, passes at every setting
  decoy0,  // 1 px noise blocks, resolved only at full resolution
  decoy1,  // 2 px blocks
  decoy2,  // 4 px blocks
  slip,    // tile truly displaced past the size tolerance, always fails
};

std::string tier_name(CorpusTier t);

struct SweepCorpusParams {
  std::string name = "sweep-corpus";
  int easy_sections = 4;
  int sections_per_tier = 4;  // for each decoy tier
  int slip_sections = 2;
  std::int64_t tile_size = 1024;
  double overlap_frac = 0.08;
  std::int64_t decoy_px = 64;    // across-axis distance of the false match
  double pattern_sigma = 10.0;   // gray levels
  double noise_ratio = 6.0;      // noise variance over pattern variance
  double pattern_cell_px = 48.0;
  std::uint64_t seed = 7;

  void validate() const;
};

struct CorpusSection {
  std::int64_t index = 0;
  CorpusTier tier = CorpusTier::easy;
};

/// Writes a 1 x 2 tile dataset. Sections are numbered from 0 in the order
/// easy, decoy0, decoy1, decoy2, slip. A ground-truth listing goes to
/// corpus.json next to dataset.json.
std::vector<CorpusSection> generate_sweep_corpus(const std::filesystem::path& root, const SweepCorpusParams& params);

/// Whether a section of this tier fails the size check when montaged with
/// the given max_octave_px and a min_octave_px of at most tile_size / 16.
bool expected_failure(CorpusTier tier, std::int64_t tile_size, std::int64_t max_octave_px);

}  // namespace emflow::sim
