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

#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli.hpp"
#include "emflow/types.hpp"

namespace emflow::cli {

void Context::prepare() {
  spdlog::set_level(spdlog::level::from_str(log_level));
  if (!config_path.empty()) config = load_config(config_path);
  if (!store_override.empty()) config.store = store_override;
}

std::filesystem::path Context::store_path() const { return config.store; }

void Context::emit(const nlohmann::json& result, const std::function<void(std::ostream&)>& human) const {
  if (json) {
    std::cout << result.dump() << '\n';
  } else {
    human(std::cout);
  }
}

bool Actions::run_parsed() const {
  const std::pair<CLI::App*, std::function<void()>>* best = nullptr;
  int best_depth = -1;
  for (const auto& e : entries_) {
    if (!e.first->parsed()) continue;
    int depth = 0;
    for (auto* p = e.first->get_parent(); p != nullptr; p = p->get_parent()) ++depth;
    if (depth > best_depth) {
      best = &e;
      best_depth = depth;
    }
  }
  if (best == nullptr) return false;
  best->second();
  return true;
}

nlohmann::json merged_params(const Context& ctx, const std::string& stage, const std::vector<std::string>& flags) {
  auto p = ctx.config.stage_params(stage);
  for (const auto& f : flags) {
    auto [k, v] = parse_assignment(f);
    p[k] = v;
  }
  return p;
}

}  // namespace emflow::cli

int main(int argc, char** argv) {
  using namespace emflow::cli;
  spdlog::set_default_logger(spdlog::stderr_color_mt("emflow"));

  CLI::App app{"emflow: EM reconstruction pipeline"};
  app.fallthrough();
  app.require_subcommand(1);
  Context ctx;
  app.add_option("--config", ctx.config_path, "TOML config file");
  app.add_option("--store", ctx.store_override, "job store path (overrides the config)");
  app.add_flag("--json", ctx.json, "machine-readable JSON on stdout");
  app.add_option("--log-level", ctx.log_level, "trace|debug|info|warn|err|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "err", "critical", "off"}));

  Actions actions;
  add_stage_commands(app, ctx, actions);
  add_workflow_commands(app, ctx, actions);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    ctx.prepare();
    if (!actions.run_parsed()) {
      std::cerr << app.help();
      return 2;
    }
  } catch (const std::exception& e) {
    if (ctx.json) std::cout << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
