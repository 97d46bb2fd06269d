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
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/workflow/job_store.hpp"

namespace emflow::sim {
class EmSimulator;
}

namespace emflow::workflow {

struct IngestEvent {
  std::int64_t section_index = 0;
  double arrival = 0.0;  // epoch seconds
  std::vector<std::filesystem::path> tile_paths;
};

void to_json(nlohmann::json& j, const IngestEvent& e);

/// Fewest workers that keep the backlog bounded when a section arrives
/// every cadence_s and each montage takes runtime_s.
std::int64_t minimum_pool(double runtime_s, double cadence_s);

/// Turns arrival events into montage jobs for one registered dataset.
/// A section that already has a montage job for this dataset is ignored
/// with a warning.
class IngestWatcher {
 public:
  IngestWatcher(JobStore& store, std::string dataset, nlohmann::json montage_params = nlohmann::json::object());

  /// Submits the montage job, or returns nullopt for a duplicate.
  std::optional<JobRecord> handle(const IngestEvent& event);

  const std::string& dataset() const { return dataset_; }
  const std::filesystem::path& root() const { return root_; }
  const std::vector<IngestEvent>& accepted() const { return accepted_; }
  std::size_t duplicates() const { return duplicates_; }

 private:
  JobStore& store_;
  std::string dataset_;
  std::filesystem::path root_;
  nlohmann::json params_;
  std::vector<IngestEvent> accepted_;
  std::size_t duplicates_ = 0;
};

struct IngestOptions {
  double cadence_s = 2.0;    // simulated: time between acquisitions
  int num_sections = 1;      // stop after this many accepted sections
  std::int64_t first_section = 0;
  double poll_s = 0.25;      // directory watch
  double timeout_s = 0.0;    // directory watch, 0 = none
  std::atomic<bool>* stop = nullptr;
};

/// Simulated microscope: acquires sections first_section.. on a fixed
/// cadence into the watcher's dataset and hands each one to the watcher.
/// The first acquisition happens immediately.
std::vector<JobRecord> ingest_simulated(IngestWatcher& watcher, const sim::EmSimulator& microscope,
                                        const IngestOptions& options);

/// Polls the dataset's sections directory and hands every section whose
/// manifest has appeared to the watcher, until num_sections were accepted,
/// the timeout passes or *stop is set. Sections present at start count as
/// arrivals.
std::vector<JobRecord> ingest_watch_directory(IngestWatcher& watcher, const IngestOptions& options);

}  // namespace emflow::workflow
