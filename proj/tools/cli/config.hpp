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
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace emflow::cli {

/// Settings from a TOML file. Relative paths resolve against the file's
/// directory.
///
///   store = "jobs.db"
///   dataset = "ds"                 # default for --dataset
///   [datasets]
///   ds = "data/ds"
///   [api]
///   bind = "127.0.0.1:8080"
///   [params.montage]               # default stage params
///   min_octave_px = 64
///   [pipeline]
///   disabled = ["mesh"]
struct Config {
  std::filesystem::path store = "emflow.db";
  std::optional<std::string> dataset;
  std::map<std::string, std::filesystem::path> datasets;
  std::string bind = "127.0.0.1:8080";
  nlohmann::json params = nlohmann::json::object();  // stage -> params
  std::vector<std::string> disabled_stages;

  /// Dataset root for a name from [datasets] or a path; falls back to the
  /// `dataset` default. Throws InvalidArgument when nothing is given.
  std::filesystem::path dataset_root(const std::string& name_or_path) const;
  nlohmann::json stage_params(const std::string& stage) const;
};

/// Throws InvalidArgument for a malformed file and NotFound for a missing one.
Config load_config(const std::filesystem::path& path);

/// Parses key=value; the value is JSON when it parses as JSON, else a string.
std::pair<std::string, nlohmann::json> parse_assignment(const std::string& text);

/// host:port; port 0 picks a free one.
std::pair<std::string, int> parse_bind(const std::string& text);

}  // namespace emflow::cli
