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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/workflow/job_store.hpp"

namespace emflow::workflow {

/// {"<stage>": {"enabled": true, "params": {}}} for every stage.
nlohmann::json default_pipeline_config();

/// Registers the dataset with the store (name from its dataset.json).
DatasetRecord register_dataset(JobStore& store, const std::filesystem::path& root);

/// Submits the pipeline DAG for every section currently in the dataset:
/// montage per section, align per consecutive pair, then relax, mask, one
/// segment job per subvolume, reconcile, and mesh plus skeletonize. A
/// disabled stage drops every stage after it (mesh and skeletonize are
/// independent). Every stage needs an entry in `stages`; a missing one
/// throws InvalidArgument. Throws NotFound for an unregistered dataset.
std::vector<JobRecord> define_pipeline(JobStore& store, const std::string& dataset, const nlohmann::json& stages);

/// Submits the montage job of one section, tagged like define_pipeline's.
JobRecord submit_montage(JobStore& store, const std::string& dataset, std::int64_t section,
                         const nlohmann::json& params = nlohmann::json::object());

}  // namespace emflow::workflow
