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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace emflow::workflow {

enum class JobState { created, ready, running, done, failed, killed };

/// "CREATED", "READY", ...
std::string state_name(JobState s);
JobState parse_state(const std::string& name);
bool is_terminal(JobState s);

/// Unit of work a job covers, fixing how many jobs a stage fans out to.
enum class Granularity { section, section_pair, subvolume, volume };

std::string granularity_name(Granularity g);
Granularity parse_granularity(const std::string& name);

struct JobSpec {
  std::string app;
  nlohmann::json args = nlohmann::json::object();
  std::vector<std::string> deps;
  std::map<std::string, std::string> tags;
  int max_attempts = 3;
  std::string workdir;
};

struct JobRecord {
  std::string id;
  std::int64_t seq = 0;  // submission order
  std::string app;
  nlohmann::json args = nlohmann::json::object();
  std::vector<std::string> deps;
  JobState state = JobState::created;
  int attempts = 0;
  int max_attempts = 3;
  std::optional<std::string> worker_id;
  std::string workdir;
  std::map<std::string, std::string> tags;
  std::map<std::string, std::string> timestamps;  // state name -> latest entry time, UTC ISO-8601
  std::string detail;
};

void to_json(nlohmann::json& j, const JobRecord& r);

struct Transition {
  std::int64_t seq = 0;
  std::string job_id;
  std::optional<JobState> from;  // empty for the initial CREATED entry
  JobState to = JobState::created;
  std::string at;  // UTC ISO-8601
  double at_epoch = 0.0;
  std::string worker_id;
  std::string note;
};

void to_json(nlohmann::json& j, const Transition& t);

/// Current time as UTC ISO-8601 with milliseconds, e.g. 2026-01-02T03:04:05.678Z.
std::string utc_now_iso();
std::string to_iso(double epoch_seconds);
double epoch_now();

}  // namespace emflow::workflow
