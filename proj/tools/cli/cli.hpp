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

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config.hpp"

namespace emflow::cli {

class Context {
 public:
  std::string config_path;
  std::string store_override;
  bool json = false;
  std::string log_level = "warn";
  Config config;

  /// Loads the config file, if any, and applies the logging level.
  void prepare();
  std::filesystem::path store_path() const;

  /// Prints `result` as JSON under --json, else calls `human`.
  void emit(const nlohmann::json& result, const std::function<void(std::ostream&)>& human) const;
};

/// Subcommands paired with what to run when they were parsed.
class Actions {
 public:
  void add(CLI::App* app, std::function<void()> run) { entries_.emplace_back(app, std::move(run)); }
  /// Runs the action of the deepest parsed subcommand; false if none.
  bool run_parsed() const;

 private:
  std::vector<std::pair<CLI::App*, std::function<void()>>> entries_;
};

/// Merges repeated key=value flags into config defaults for a stage.
nlohmann::json merged_params(const Context& ctx, const std::string& stage, const std::vector<std::string>& flags);

void add_stage_commands(CLI::App& app, Context& ctx, Actions& actions);
void add_workflow_commands(CLI::App& app, Context& ctx, Actions& actions);

}  // namespace emflow::cli
