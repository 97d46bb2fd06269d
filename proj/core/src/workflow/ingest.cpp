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

#include "emflow/workflow/ingest.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "emflow/sim/em_dataset.hpp"
#include "emflow/volume/section.hpp"
#include "emflow/workflow/dataset.hpp"
#include "emflow/workflow/pipeline.hpp"

namespace emflow::workflow {
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

bool stopped(const IngestOptions& o) { return o.stop != nullptr && o.stop->load(); }

void validate(const IngestOptions& o) {
  if (o.num_sections < 1) throw InvalidArgument("num_sections must be >= 1");
  if (!(o.cadence_s >= 0.0)) throw InvalidArgument("cadence_s must be >= 0");
  if (!(o.poll_s > 0.0)) throw InvalidArgument("poll_s must be > 0");
  if (!(o.timeout_s >= 0.0)) throw InvalidArgument("timeout_s must be >= 0");
}

// Sleeps until `until` in short steps so a stop request is seen quickly.
void wait_until(Clock::time_point until, const IngestOptions& o) {
  while (!stopped(o)) {
    const auto now = Clock::now();
    if (now >= until) return;
    std::this_thread::sleep_for(std::min<Clock::duration>(until - now, std::chrono::milliseconds(20)));
  }
}

}  // namespace

void to_json(json& j, const IngestEvent& e) {
  json tiles = json::array();
  for (const auto& p : e.tile_paths) tiles.push_back(p.string());
  j = {{"section_index", e.section_index}, {"arrival", to_iso(e.arrival)}, {"tile_paths", tiles}};
}

std::int64_t minimum_pool(double runtime_s, double cadence_s) {
  if (!(runtime_s >= 0.0) || !(cadence_s > 0.0)) throw InvalidArgument("need runtime_s >= 0 and cadence_s > 0");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(runtime_s / cadence_s - 1e-9)));
}

IngestWatcher::IngestWatcher(JobStore& store, std::string dataset, json montage_params)
    : store_(store), dataset_(std::move(dataset)), params_(std::move(montage_params)) {
  root_ = store_.dataset(dataset_).root;
  if (!params_.is_object()) throw InvalidArgument("montage params must be an object");
}

std::optional<JobRecord> IngestWatcher::handle(const IngestEvent& event) {
  JobFilter f;
  f.app = "montage";
  f.tags = {{"dataset", dataset_}, {"section", std::to_string(event.section_index)}};
  if (!store_.list(f).empty()) {
    ++duplicates_;
    spdlog::warn("ingest: section {} of dataset '{}' already has a montage job, event ignored", event.section_index,
                 dataset_);
    return std::nullopt;
  }
  auto rec = submit_montage(store_, dataset_, event.section_index, params_);
  accepted_.push_back(event);
  spdlog::info("ingest: section {} -> job {}", event.section_index, rec.id);
  return rec;
}

std::vector<JobRecord> ingest_simulated(IngestWatcher& watcher, const sim::EmSimulator& microscope,
                                        const IngestOptions& options) {
  validate(options);
  const DatasetLayout layout(watcher.root());
  std::vector<JobRecord> out;
  const auto start = Clock::now();
  for (int i = 0; i < options.num_sections && !stopped(options); ++i) {
    wait_until(start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(i * options.cadence_s)),
               options);
    if (stopped(options)) break;
    const std::int64_t section = options.first_section + i;
    auto manifest = microscope.acquire(layout, section);
    IngestEvent e{section, epoch_now(), {}};
    for (const auto& p : manifest.tile_paths) e.tile_paths.push_back(layout.section_dir(section) / p);
    if (auto rec = watcher.handle(e)) out.push_back(std::move(*rec));
  }
  return out;
}

std::vector<JobRecord> ingest_watch_directory(IngestWatcher& watcher, const IngestOptions& options) {
  validate(options);
  const DatasetLayout layout(watcher.root());
  std::set<std::int64_t> seen;
  std::vector<JobRecord> out;
  const auto start = Clock::now();
  const auto poll = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.poll_s));
  while (!stopped(options) && static_cast<int>(watcher.accepted().size()) < options.num_sections) {
    for (auto s : layout.sections()) {
      if (!seen.insert(s).second) continue;
      IngestEvent e{s, epoch_now(), {}};
      try {
        e.tile_paths = volume::load_section_manifest(layout.section_manifest(s)).tile_paths;
      } catch (const Error& err) {
        spdlog::warn("ingest: section {} manifest unreadable: {}", s, err.what());
        seen.erase(s);
        continue;
      }
      if (auto rec = watcher.handle(e)) out.push_back(std::move(*rec));
      if (static_cast<int>(watcher.accepted().size()) >= options.num_sections) break;
    }
    if (static_cast<int>(watcher.accepted().size()) >= options.num_sections) break;
    if (options.timeout_s > 0 &&
        std::chrono::duration<double>(Clock::now() - start).count() >= options.timeout_s) {
      break;
    }
    wait_until(Clock::now() + poll, options);
  }
  return out;
}

}  // namespace emflow::workflow
