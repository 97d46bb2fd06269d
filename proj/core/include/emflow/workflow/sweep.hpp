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
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace emflow::workflow {

struct SweepSpec {
  std::string id;  // generated when empty
  std::vector<nlohmann::json> parameter_sets;  // montage stage params, run in order
  std::filesystem::path corpus;                // dataset root
  double size_tolerance = 0.02;                // failure detector

  void validate() const;
};

struct SweepRow {
  nlohmann::json params;
  double runtime_s = 0.0;
  std::vector<std::int64_t> failed_sections;
  double error_rate = 0.0;
  double accumulated_error = 0.0;
};

struct SweepReport {
  std::string id;
  std::string corpus;
  std::size_t sections = 0;
  std::vector<SweepRow> rows;
  std::string created_at;
};

void to_json(nlohmann::json& j, const SweepReport& r);

/// Per-row (error rate, accumulated error) for failure sets over n sections.
/// Accumulated error after row k is the fraction of sections in every set
/// 0..k, so it never increases.
std::vector<std::pair<double, double>> error_columns(const std::vector<std::set<std::int64_t>>& failed,
                                                     std::size_t sections);

/// Montages every corpus section under each parameter set in turn and
/// counts sections whose canvas fails the size check. Tiles are loaded once
/// before timing starts; runtime covers montage only.
SweepReport run_sweep(const SweepSpec& spec);

}  // namespace emflow::workflow
