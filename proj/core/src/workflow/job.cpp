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

#include "emflow/workflow/job.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include "emflow/types.hpp"

namespace emflow::workflow {

std::string state_name(JobState s) {
  switch (s) {
    case JobState::created: return "CREATED";
    case JobState::ready: return "READY";
    case JobState::running: return "RUNNING";
    case JobState::done: return "DONE";
    case JobState::failed: return "FAILED";
    case JobState::killed: return "KILLED";
  }
  return "?";
}

JobState parse_state(const std::string& name) {
  for (auto s : {JobState::created, JobState::ready, JobState::running, JobState::done, JobState::failed,
                 JobState::killed}) {
    if (state_name(s) == name) return s;
  }
  throw InvalidArgument("unknown job state '" + name + "'");
}

bool is_terminal(JobState s) { return s == JobState::done || s == JobState::failed || s == JobState::killed; }

std::string granularity_name(Granularity g) {
  switch (g) {
    case Granularity::section: return "section";
    case Granularity::section_pair: return "section_pair";
    case Granularity::subvolume: return "subvolume";
    case Granularity::volume: return "volume";
  }
  return "?";
}

Granularity parse_granularity(const std::string& name) {
  for (auto g : {Granularity::section, Granularity::section_pair, Granularity::subvolume, Granularity::volume}) {
    if (granularity_name(g) == name) return g;
  }
  throw InvalidArgument("unknown granularity '" + name + "'");
}

void to_json(nlohmann::json& j, const JobRecord& r) {
  j = {{"id", r.id},
       {"seq", r.seq},
       {"app", r.app},
       {"args", r.args},
       {"deps", r.deps},
       {"state", state_name(r.state)},
       {"attempts", r.attempts},
       {"max_attempts", r.max_attempts},
       {"worker_id", r.worker_id ? nlohmann::json(*r.worker_id) : nlohmann::json(nullptr)},
       {"workdir", r.workdir},
       {"tags", r.tags},
       {"timestamps", r.timestamps},
       {"detail", r.detail}};
}

void to_json(nlohmann::json& j, const Transition& t) {
  j = {{"seq", t.seq},
       {"job_id", t.job_id},
       {"from", t.from ? nlohmann::json(state_name(*t.from)) : nlohmann::json(nullptr)},
       {"to", state_name(t.to)},
       {"at", t.at},
       {"worker_id", t.worker_id},
       {"note", t.note}};
}

double epoch_now() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::string to_iso(double epoch_seconds) {
  const double whole = std::floor(epoch_seconds);
  auto ms = static_cast<int>(std::lround((epoch_seconds - whole) * 1000.0));
  auto secs = static_cast<std::time_t>(whole);
  if (ms == 1000) {
    ms = 0;
    ++secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, ms);
  return out;
}

std::string utc_now_iso() { return to_iso(epoch_now()); }

}  // namespace emflow::workflow
