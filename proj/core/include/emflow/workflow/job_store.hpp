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

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/workflow/job.hpp"

struct sqlite3;

namespace emflow::workflow {

enum class Outcome { done, failed };

struct AppInfo {
  std::string name;
  Granularity granularity = Granularity::volume;
  std::optional<double> avg_runtime_s;  // moving average over DONE runs
  std::int64_t runs = 0;
};

struct JobFilter {
  std::optional<JobState> state;
  std::map<std::string, std::string> tags;  // every entry must match
  std::optional<std::string> app;
};

struct DatasetRecord {
  std::string name;
  std::filesystem::path root;
  nlohmann::json info = nlohmann::json::object();
  std::string created_at;
};

void to_json(nlohmann::json& j, const DatasetRecord& d);

/// Persistent job database in a single SQLite file.
///
/// Every mutation runs in its own immediate transaction, so several
/// JobStore instances (threads or processes) may share one file. A single
/// instance is also safe to share between threads.
class JobStore {
 public:
  explicit JobStore(const std::filesystem::path& path);
  ~JobStore();
  JobStore(const JobStore&) = delete;
  JobStore& operator=(const JobStore&) = delete;

  const std::filesystem::path& path() const { return path_; }

  /// Inserts or updates the app. Returns false if it already existed.
  bool register_app(const std::string& name, Granularity granularity);
  AppInfo app(const std::string& name) const;
  std::vector<AppInfo> apps() const;

  /// Persists the job in CREATED and promotes it to READY when all deps are
  /// DONE. Throws NotFound for an unknown app or dependency.
  JobRecord submit(const JobSpec& spec);

  /// Claims the READY job with the lowest submission sequence, or returns
  /// nothing when none is READY. Increments attempts.
  std::optional<JobRecord> claim_next(const std::string& worker_id);

  /// Finishes a RUNNING job owned by `worker_id`. DONE promotes dependents
  /// whose deps are now all DONE. FAILED re-enters READY while attempts <
  /// max_attempts. Throws Conflict on wrong state or owner.
  void complete(const std::string& id, const std::string& worker_id, Outcome outcome,
                const std::string& detail = "");

  /// Moves a non-terminal job to KILLED. Throws Conflict if already terminal.
  void kill(const std::string& id, const std::string& note = "");

  /// Submits a copy of the job with args merge-patched by `overrides`. The
  /// copy keeps deps and tags and adds tag rerun_of=<id>. Dependents of the
  /// original still in CREATED switch their dependency to the copy.
  JobRecord rerun(const std::string& id, const nlohmann::json& overrides = nlohmann::json::object());

  JobRecord get(const std::string& id) const;
  std::optional<JobRecord> find(const std::string& id) const;
  std::vector<JobRecord> list(const JobFilter& filter = {}) const;
  std::map<JobState, std::size_t> counts() const;
  std::size_t count(JobState state) const;

  /// Transition log in commit order, for one job or all jobs.
  std::vector<Transition> transitions(const std::string& job_id = "") const;

  /// Appends to the job's captured output; only the last kOutputKeep bytes are kept.
  void append_output(const std::string& id, const std::string& text);
  std::string output_tail(const std::string& id, std::size_t max_bytes = 4096) const;
  static constexpr std::size_t kOutputKeep = 65536;

  /// Lease for RUNNING jobs of an app: 10x its average runtime, at least min_lease_s.
  double lease_seconds(const std::string& app, double min_lease_s = 60.0) const;

  /// Returns RUNNING jobs whose lease has expired to READY (or FAILED when
  /// out of attempts). Returns the ids that were touched.
  std::vector<std::string> requeue_stale(double min_lease_s = 60.0);

  void put_dataset(const DatasetRecord& d);
  DatasetRecord dataset(const std::string& name) const;
  std::vector<DatasetRecord> datasets() const;

  void put_sweep(const std::string& id, const nlohmann::json& report);
  nlohmann::json sweep(const std::string& id) const;

  void put_review(const std::string& dataset, int section, const std::string& verdict,
                  const std::string& job_id);
  nlohmann::json reviews(const std::string& dataset) const;

  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta(const std::string& key) const;

 private:
  class Txn;
  JobRecord load(const std::string& id) const;
  void log_transition(const std::string& id, std::optional<JobState> from, JobState to, double at,
                      const std::string& worker, const std::string& note);
  void set_state(const std::string& id, JobState from, JobState to, double at, const std::string& worker,
                 const std::string& note);
  bool deps_done(const std::vector<std::string>& deps) const;
  void promote_dependents(const std::string& id, double at);
  JobRecord submit_locked(const JobSpec& spec);

  std::filesystem::path path_;
  sqlite3* db_ = nullptr;
  mutable std::recursive_mutex mutex_;
};

}  // namespace emflow::workflow
