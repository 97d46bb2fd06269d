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

#include "emflow/workflow/app.hpp"

#include "emflow/types.hpp"

namespace emflow::workflow {

void AppRegistry::add(AppRegistration app) {
  if (app.name.empty()) throw InvalidArgument("app name must not be empty");
  if (!app.entry) throw InvalidArgument("app '" + app.name + "' has no entry");
  if (contains(app.name)) throw Conflict("app '" + app.name + "' is already registered");
  const auto name = app.name;
  apps_.emplace(name, std::move(app));
}

const AppRegistration& AppRegistry::get(const std::string& name) const {
  const auto it = apps_.find(name);
  if (it == apps_.end()) throw NotFound("unknown app '" + name + "'");
  return it->second;
}

std::vector<std::string> AppRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, app] : apps_) out.push_back(name);
  return out;
}

void AppRegistry::validate_args(const std::string& name, const nlohmann::json& args) const {
  for (const auto& key : get(name).required_args) {
    if (!args.contains(key)) throw InvalidArgument("app '" + name + "' requires arg '" + key + "'");
  }
}

void AppRegistry::register_with(JobStore& store) const {
  for (const auto& [name, app] : apps_) store.register_app(name, app.granularity);
}

}  // namespace emflow::workflow
