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

#include "emflow/workflow/pipeline.hpp"

#include "emflow/workflow/dataset.hpp"
#include "emflow/workflow/stages.hpp"

namespace emflow::workflow {
using nlohmann::json;

json default_pipeline_config() {
  json out = json::object();
  for (const char* s : kStageNames) out[s] = {{"enabled", true}, {"params", json::object()}};
  return out;
}

DatasetRecord register_dataset(JobStore& store, const std::filesystem::path& root) {
  const DatasetLayout layout(std::filesystem::absolute(root));
  const auto cfg = layout.load_config();
  DatasetRecord rec{cfg.name, layout.root(), cfg, ""};
  store.put_dataset(rec);
  return store.dataset(cfg.name);
}

namespace {

struct StageConf {
  bool enabled = true;
  json params = json::object();
  int max_attempts = 3;
};

StageConf stage_conf(const json& stages, const std::string& name) {
  if (!stages.is_object() || !stages.contains(name)) {
    throw InvalidArgument("pipeline config has no entry for stage '" + name + "'");
  }
  const auto& s = stages.at(name);
  StageConf c;
  c.enabled = s.value("enabled", true);
  c.params = s.value("params", json::object());
  c.max_attempts = s.value("max_attempts", 3);
  stage_params(name, c.params);
  return c;
}

std::map<std::string, std::string> tags_for(const std::string& dataset, const std::string& stage) {
  return {{"dataset", dataset}, {"stage", stage}};
}

}  // namespace

JobRecord submit_montage(JobStore& store, const std::string& dataset, std::int64_t section, const json& params) {
  const auto rec = store.dataset(dataset);
  store.register_app("montage", Granularity::section);
  JobSpec spec;
  spec.app = "montage";
  spec.args = {{"root", rec.root.string()}, {"section", section}, {"params", params}};
  spec.tags = tags_for(dataset, "montage");
  spec.tags["section"] = std::to_string(section);
  return store.submit(spec);
}

std::vector<JobRecord> define_pipeline(JobStore& store, const std::string& dataset, const json& stages) {
  std::map<std::string, StageConf> conf;
  for (const char* s : kStageNames) conf[s] = stage_conf(stages, s);
  const auto rec = store.dataset(dataset);
  const DatasetLayout layout(rec.root);
  const auto cfg = layout.load_config();
  const auto sections = layout.sections();
  if (sections.empty()) throw InvalidArgument("dataset '" + dataset + "' has no sections");
  for (const char* s : kStageNames) store.register_app(s, stage_granularity(s));

  const std::string root = rec.root.string();
  std::vector<JobRecord> out;
  auto submit = [&](const std::string& stage, json args, std::vector<std::string> deps,
                    std::map<std::string, std::string> extra_tags = {}) {
    args["root"] = root;
    args["params"] = conf[stage].params;
    JobSpec spec;
    spec.app = stage;
    spec.args = std::move(args);
    spec.deps = std::move(deps);
    spec.tags = tags_for(dataset, stage);
    spec.tags.insert(extra_tags.begin(), extra_tags.end());
    spec.max_attempts = conf[stage].max_attempts;
    out.push_back(store.submit(spec));
    return out.back().id;
  };
  if (!conf["montage"].enabled) return out;
  std::vector<std::string> montage;
  for (auto s : sections) {
    montage.push_back(submit("montage", {{"section", s}}, {}, {{"section", std::to_string(s)}}));
  }
  if (!conf["align"].enabled) return out;
  std::vector<std::string> align;
  for (std::size_t k = 0; k + 1 < sections.size(); ++k) {
    align.push_back(submit("align", {{"pair", {sections[k], sections[k + 1]}}}, {montage[k], montage[k + 1]},
                           {{"section", std::to_string(sections[k])}}));
  }
  if (!conf["relax"].enabled) return out;
  const auto relax = submit("relax", {{"sections", sections}}, align.empty() ? montage : align);
  if (!conf["mask"].enabled) return out;
  const auto mask = submit("mask", json::object(), {relax});
  if (!conf["segment"].enabled) return out;

  const auto [w, h] = cfg.section_dims();
  const Vec3i dims{w, h, static_cast<std::int64_t>(sections.size())};
  const auto seg_params = stage_params("segment", conf["segment"].params);
  std::vector<std::string> segments;
  for (const auto& index : subvolume_indices(dims, seg_params)) {
    segments.push_back(submit("segment", {{"index", {index.x, index.y, index.z}}}, {mask},
                              {{"subvolume", std::to_string(index.x) + "-" + std::to_string(index.y) + "-" +
                                                 std::to_string(index.z)}}));
  }
  if (!conf["reconcile"].enabled) return out;
  // reconcile must regenerate the grid the segment jobs used
  conf["reconcile"].params["cube"] = seg_params["cube"];
  conf["reconcile"].params["overlap"] = seg_params["overlap"];
  const auto reconcile = submit("reconcile", json::object(), segments);
  if (conf["mesh"].enabled) submit("mesh", json::object(), {reconcile});
  if (conf["skeletonize"].enabled) submit("skeletonize", json::object(), {reconcile});
  return out;
}

}  // namespace emflow::workflow
