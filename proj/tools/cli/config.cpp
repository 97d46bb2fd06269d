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

#include "config.hpp"

#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "emflow/types.hpp"

namespace emflow::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const toml::table& t) {
  std::stringstream ss;
  ss << toml::json_formatter{t};
  return json::parse(ss.str());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

fs::path Config::dataset_root(const std::string& name_or_path) const {
  std::string key = name_or_path;
  if (key.empty()) {
    if (!dataset) throw InvalidArgument("no dataset given (use --dataset or set 'dataset' in the config)");
    key = *dataset;
  }
  const auto it = datasets.find(key);
  return it != datasets.end() ? it->second : fs::path(key);
}

json Config::stage_params(const std::string& stage) const {
  return params.contains(stage) ? params.at(stage) : json::object();
}

Config load_config(const fs::path& path) {
  if (!fs::exists(path)) throw NotFound("config file " + path.string() + " does not exist");
  toml::table t;
  try {
    t = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config " << path.string() << ": " << e.description() << " at line " << e.source().begin.line;
    throw InvalidArgument(msg.str());
  }
  const json j = to_json(t);
  const fs::path base = fs::absolute(path).parent_path();
  Config c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "store") {
        c.store = resolve(base, value.get<std::string>());
      } else if (key == "dataset") {
        c.dataset = value.get<std::string>();
      } else if (key == "datasets") {
        for (const auto& [name, root] : value.items()) c.datasets[name] = resolve(base, root.get<std::string>());
      } else if (key == "api") {
        c.bind = value.value("bind", c.bind);
      } else if (key == "params") {
        if (!value.is_object()) throw InvalidArgument("[params] must be a table");
        c.params = value;
      } else if (key == "pipeline") {
        c.disabled_stages = value.value("disabled", std::vector<std::string>{});
      } else {
        throw InvalidArgument("config " + path.string() + ": unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  return c;
}

std::pair<std::string, json> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("expected key=value, got '" + text + "'");
  const auto value = text.substr(eq + 1);
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = value;
  return {text.substr(0, eq), v};
}

std::pair<std::string, int> parse_bind(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw InvalidArgument("bind address must be host:port, got '" + text + "'");
  int port = -1;
  try {
    port = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) throw InvalidArgument("bad port in bind address '" + text + "'");
  return {text.substr(0, colon), port};
}

}  // namespace emflow::cli
