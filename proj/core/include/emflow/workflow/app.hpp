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
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/workflow/job_store.hpp"

namespace emflow::workflow {

/// What a running job sees.
struct JobContext {
  const JobRecord& job;
  JobStore& store;
  std::string worker_id;

  /// Appends a line to the job's captured output.
  void log(const std::string& line) const { store.append_output(job.id, line + "\n"); }
};

/// Runs the job and returns a JSON result stored as its detail. Throwing
/// fails the job with the exception message.
using AppEntry = std::function<nlohmann::json(const JobContext&)>;

struct AppRegistration {
  std::string name;
  Granularity granularity = Granularity::volume;
  std::vector<std::string> required_args;
  AppEntry entry;
};

class AppRegistry {
 public:
  /// Throws Conflict when the name is taken.
  void add(AppRegistration app);
  bool contains(const std::string& name) const { return apps_.count(name) != 0; }
  const AppRegistration& get(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Throws InvalidArgument naming the first missing required arg.
  void validate_args(const std::string& name, const nlohmann::json& args) const;

  /// Registers every app with the store.
  void register_with(JobStore& store) const;

 private:
  std::map<std::string, AppRegistration> apps_;
};

}  // namespace emflow::workflow
