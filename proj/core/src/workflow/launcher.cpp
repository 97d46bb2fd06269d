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

#include "emflow/workflow/launcher.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "emflow/types.hpp"

namespace emflow::workflow {
using nlohmann::json;

void PoolPolicy::validate() const {
  if (min_workers < 1 || min_workers > max_workers) {
    throw InvalidArgument("pool policy needs 1 <= min_workers <= max_workers, got " + std::to_string(min_workers) +
                          ".." + std::to_string(max_workers));
  }
  if (!(scale_up_backlog > 0.0)) throw InvalidArgument("scale_up_backlog must be > 0");
  if (!(scale_down_idle_s >= 0.0)) throw InvalidArgument("scale_down_idle_s must be >= 0");
}

void to_json(json& j, const LauncherSummary& s) {
  json runs = json::array();
  for (const auto& r : s.runs) {
    runs.push_back({{"job_id", r.job_id},
                    {"app", r.app},
                    {"worker_id", r.worker_id},
                    {"start_s", r.start_s},
                    {"wall_s", r.wall_s()},
                    {"ok", r.ok},
                    {"detail", r.detail}});
  }
  json timeline = json::array();
  for (const auto& p : s.timeline) {
    timeline.push_back({{"t_s", p.t_s}, {"workers", p.workers}, {"ready", p.ready}, {"running", p.running}});
  }
  j = {{"runs", runs},
       {"timeline", timeline},
       {"wall_s", s.wall_s},
       {"done", s.done},
       {"failed", s.failed},
       {"peak_workers", s.peak_workers},
       {"hit_wall_limit", s.hit_wall_limit},
       {"requeued", s.requeued}};
}

namespace {
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void sleep_s(double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); }

}  // namespace

struct Launcher::Impl {
  Launcher& owner;
  Clock::time_point t0 = Clock::now();
  std::atomic<int> active{0};
  std::atomic<bool> draining{false};
  std::atomic<bool> paused{false};
  std::mutex runs_mutex;
  std::vector<JobRun> runs;
  std::atomic<int> next_worker{0};

  struct Slot {
    std::thread thread;
    std::atomic<bool> exited{false};
  };
  std::vector<std::unique_ptr<Slot>> slots;

  explicit Impl(Launcher& l) : owner(l) {}

  void spawn() {
    auto slot = std::make_unique<Slot>();
    auto* raw = slot.get();
    const std::string id = owner.options_.name + "-w" + std::to_string(next_worker++);
    ++active;
    raw->thread = std::thread([this, raw, id] {
      try {
        worker(id);
      } catch (const std::exception& e) {
        spdlog::error("worker {} stopped: {}", id, e.what());
        --active;
      }
      raw->exited = true;
    });
    slots.push_back(std::move(slot));
  }

  // Leaves the pool if it stays at or above min afterwards.
  bool try_retire() {
    int w = active.load();
    while (w > owner.options_.policy.min_workers) {
      if (active.compare_exchange_weak(w, w - 1)) return true;
    }
    return false;
  }

  void worker(const std::string& id) {
    const auto& opt = owner.options_;
    JobStore store(owner.store_path_);
    auto idle_since = Clock::now();
    for (;;) {
      if (draining) {
        --active;
        return;
      }
      std::optional<JobRecord> job;
      if (!paused) job = store.claim_next(id);
      if (!job) {
        if (since(idle_since) >= opt.policy.scale_down_idle_s && try_retire()) {
          spdlog::debug("worker {} retiring after {:.2f} s idle", id, since(idle_since));
          return;
        }
        sleep_s(opt.poll_s);
        continue;
      }
      JobRun run{job->id, job->app, id, since(t0), 0.0, false, ""};
      Outcome outcome = Outcome::failed;
      try {
        owner.apps_.validate_args(job->app, job->args);
        const JobContext ctx{*job, store, id};
        const json result = owner.apps_.get(job->app).entry(ctx);
        run.detail = result.is_null() ? "" : result.dump();
        outcome = Outcome::done;
      } catch (const std::exception& e) {
        run.detail = e.what();
        store.append_output(job->id, std::string("error: ") + e.what() + "\n");
      }
      try {
        store.complete(job->id, id, outcome, run.detail);
        run.ok = outcome == Outcome::done;
      } catch (const Conflict& e) {
        // killed or requeued while running
        run.detail = e.what();
      }
      run.end_s = since(t0);
      {
        std::lock_guard lock(runs_mutex);
        runs.push_back(run);
      }
      idle_since = Clock::now();
    }
  }

  void reap() {
    for (auto it = slots.begin(); it != slots.end();) {
      if ((*it)->exited) {
        (*it)->thread.join();
        it = slots.erase(it);
      } else {
        ++it;
      }
    }
  }

  void publish(JobStore& store, bool running, const PoolSample& s) {
    const auto& p = owner.options_.policy;
    json status = {{"running", running},
                   {"name", owner.options_.name},
                   {"paused", paused.load()},
                   {"workers", s.workers},
                   {"ready", s.ready},
                   {"running_jobs", s.running},
                   {"policy",
                    {{"min_workers", p.min_workers},
                     {"max_workers", p.max_workers},
                     {"scale_up_backlog", p.scale_up_backlog},
                     {"scale_down_idle_s", p.scale_down_idle_s}}},
                   {"updated_at", utc_now_iso()}};
    store.set_meta(kLauncherStatusKey, status.dump());
  }

  LauncherSummary run() {
    const auto& opt = owner.options_;
    opt.policy.validate();
    if (!(opt.tick_s > 0.0) || !(opt.poll_s > 0.0)) throw InvalidArgument("tick_s and poll_s must be > 0");
    JobStore store(owner.store_path_);
    owner.apps_.register_with(store);
    LauncherSummary summary;
    summary.requeued = store.requeue_stale(opt.min_lease_s);
    auto last_requeue = Clock::now();
    auto last_publish = Clock::now() - std::chrono::hours(1);
    paused = store.meta(kLauncherPausedKey).value_or("0") == "1";

    for (int i = 0; i < opt.policy.min_workers; ++i) spawn();
    for (;;) {
      reap();
      paused = store.meta(kLauncherPausedKey).value_or("0") == "1";
      const auto counts = store.counts();
      PoolSample s{since(t0), active.load(), counts.at(JobState::ready), counts.at(JobState::running)};
      summary.timeline.push_back(s);
      summary.peak_workers = std::max(summary.peak_workers, s.workers);
      if (since(last_publish) >= 0.5) {
        publish(store, true, s);
        last_publish = Clock::now();
      }

      if (owner.stop_) break;
      if (opt.wall_limit_s > 0.0 && s.t_s >= opt.wall_limit_s) {
        summary.hit_wall_limit = true;
        break;
      }
      if (opt.stop_when_idle && s.ready == 0 && s.running == 0 && s.workers == opt.policy.min_workers) break;

      if (!paused && s.workers < opt.policy.max_workers &&
          static_cast<double>(s.ready) > opt.policy.scale_up_backlog * s.workers) {
        spawn();
      }
      if (since(last_requeue) >= opt.requeue_every_s) {
        for (auto& id : store.requeue_stale(opt.min_lease_s)) summary.requeued.push_back(id);
        last_requeue = Clock::now();
      }
      sleep_s(opt.tick_s);
    }

    draining = true;
    for (auto& slot : slots) slot->thread.join();
    slots.clear();
    summary.runs = std::move(runs);
    for (const auto& r : summary.runs) (r.ok ? summary.done : summary.failed) += 1;
    summary.wall_s = since(t0);
    publish(store, false, {summary.wall_s, 0, store.count(JobState::ready), store.count(JobState::running)});
    return summary;
  }
};

Launcher::Launcher(const std::filesystem::path& store_path, const AppRegistry& apps, LauncherOptions options)
    : store_path_(store_path), apps_(apps), options_(std::move(options)) {
  options_.policy.validate();
}

Launcher::~Launcher() = default;

LauncherSummary Launcher::run() {
  Impl impl(*this);
  return impl.run();
}

LauncherSummary run_launcher(const std::filesystem::path& store_path, const AppRegistry& apps, const PoolPolicy& policy,
                             double wall_limit_s) {
  LauncherOptions opt;
  opt.policy = policy;
  opt.wall_limit_s = wall_limit_s;
  return Launcher(store_path, apps, opt).run();
}

}  // namespace emflow::workflow
