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

#include <atomic>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/workflow/app.hpp"
#include "emflow/workflow/job_store.hpp"

namespace emflow::workflow {

struct PoolPolicy {
  int min_workers = 1;
  int max_workers = 4;
  double scale_up_backlog = 2.0;   // READY jobs per worker before growing
  double scale_down_idle_s = 5.0;  // idle time before a worker above min exits

  /// Throws InvalidArgument unless 1 <= min <= max, backlog > 0 and idle >= 0.
  void validate() const;
};

struct LauncherOptions {
  PoolPolicy policy;
  double wall_limit_s = 0.0;  // 0 runs until stopped
  double tick_s = 0.05;       // manager sampling period
  double poll_s = 0.02;       // idle worker claim period
  bool stop_when_idle = false;  // return once nothing is READY or RUNNING and the pool is at min
  double min_lease_s = 60.0;
  double requeue_every_s = 5.0;
  std::string name = "launcher";
};

struct JobRun {
  std::string job_id;
  std::string app;
  std::string worker_id;
  double start_s = 0.0;  // since launcher start
  double end_s = 0.0;
  bool ok = false;
  std::string detail;

  double wall_s() const { return end_s - start_s; }
};

struct PoolSample {
  double t_s = 0.0;
  int workers = 0;
  std::size_t ready = 0;
  std::size_t running = 0;
};

struct LauncherSummary {
  std::vector<JobRun> runs;
  std::vector<PoolSample> timeline;
  double wall_s = 0.0;
  std::size_t done = 0;
  std::size_t failed = 0;
  int peak_workers = 0;
  bool hit_wall_limit = false;
  std::vector<std::string> requeued;
};

void to_json(nlohmann::json& j, const LauncherSummary& s);

/// Store meta keys shared with the API service.
inline constexpr const char* kLauncherPausedKey = "launcher.paused";
inline constexpr const char* kLauncherStatusKey = "launcher.status";

/// Elastic worker pool over a job store.
///
/// Starts min_workers threads, each with its own store connection. Every
/// tick the manager grows the pool by one while READY > scale_up_backlog *
/// workers (up to max). A worker above min that has been idle for
/// scale_down_idle_s exits. At the wall limit workers stop claiming, finish
/// their current job, and the run returns. Stale RUNNING jobs are requeued
/// at start and periodically.
class Launcher {
 public:
  Launcher(const std::filesystem::path& store_path, const AppRegistry& apps, LauncherOptions options);
  ~Launcher();

  LauncherSummary run();

  /// Thread-safe; makes run() drain and return.
  void request_stop() { stop_ = true; }

 private:
  struct Impl;
  std::filesystem::path store_path_;
  AppRegistry apps_;
  LauncherOptions options_;
  std::atomic<bool> stop_{false};
};

LauncherSummary run_launcher(const std::filesystem::path& store_path, const AppRegistry& apps, const PoolPolicy& policy,
                             double wall_limit_s);

}  // namespace emflow::workflow
