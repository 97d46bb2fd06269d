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

#include "emflow/workflow/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "emflow/imageops/montage.hpp"
#include "emflow/workflow/dataset.hpp"
#include "emflow/workflow/job.hpp"
#include "emflow/workflow/stages.hpp"

namespace emflow::workflow {
using nlohmann::json;

void SweepSpec::validate() const {
  if (parameter_sets.empty()) throw InvalidArgument("a sweep needs at least one parameter set");
  for (const auto& p : parameter_sets) stage_params("montage", p);
  if (!(size_tolerance >= 0.0)) throw InvalidArgument("size_tolerance must be >= 0");
}

void to_json(json& j, const SweepReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"params", row.params},
                    {"runtime_s", row.runtime_s},
                    {"error_rate", row.error_rate},
                    {"accumulated_error", row.accumulated_error},
                    {"failed_sections", row.failed_sections}});
  }
  j = {{"id", r.id}, {"corpus", r.corpus}, {"sections", r.sections}, {"rows", rows}, {"created_at", r.created_at}};
}

std::vector<std::pair<double, double>> error_columns(const std::vector<std::set<std::int64_t>>& failed,
                                                     std::size_t sections) {
  if (sections == 0) throw InvalidArgument("error rates need at least one section");
  std::vector<std::pair<double, double>> out;
  std::set<std::int64_t> all;
  const double n = static_cast<double>(sections);
  for (std::size_t k = 0; k < failed.size(); ++k) {
    if (k == 0) {
      all = failed[0];
    } else {
      std::set<std::int64_t> both;
      std::set_intersection(all.begin(), all.end(), failed[k].begin(), failed[k].end(),
                            std::inserter(both, both.begin()));
      all = std::move(both);
    }
    out.emplace_back(static_cast<double>(failed[k].size()) / n, static_cast<double>(all.size()) / n);
  }
  return out;
}

SweepReport run_sweep(const SweepSpec& spec) {
  spec.validate();
  const DatasetLayout layout(spec.corpus);
  const auto cfg = layout.load_config();
  const auto sections = layout.sections();
  if (sections.empty()) throw InvalidArgument("sweep corpus " + spec.corpus.string() + " has no sections");

  struct Loaded {
    std::int64_t index;
    volume::SectionManifest manifest;
    std::vector<volume::GrayImage> tiles;
  };
  std::vector<Loaded> corpus;
  for (auto s : sections) {
    auto m = volume::load_section_manifest(layout.section_manifest(s));
    auto tiles = volume::load_tiles(m);
    corpus.push_back({s, std::move(m), std::move(tiles)});
  }

  SweepReport report;
  report.id = spec.id;
  if (report.id.empty()) {
    std::mt19937_64 rng{std::random_device{}()};
    report.id = "sweep-" + std::to_string(rng() % 1000000000ULL);
  }
  report.corpus = spec.corpus.string();
  report.sections = corpus.size();
  report.created_at = utc_now_iso();

  std::vector<std::set<std::int64_t>> failed;
  for (const auto& set : spec.parameter_sets) {
    const auto p = stage_params("montage", set);
    imageops::MontageParams mp;
    mp.min_octave_px = p.at("min_octave_px").get<std::int64_t>();
    mp.max_octave_px = p.at("max_octave_px").get<std::int64_t>();
    mp.search_margin_frac = p.at("search_margin_frac").get<double>();
    mp.ncc_accept_threshold = p.at("ncc_accept_threshold").get<double>();
    SweepRow row;
    row.params = set;
    std::set<std::int64_t> fails;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& sec : corpus) {
      mp.nominal_overlap_frac = sec.manifest.nominal_overlap_frac;
      const auto r = imageops::montage_tiles(sec.tiles, sec.manifest.rows, sec.manifest.cols, sec.index, mp,
                                             spec.size_tolerance);
      if (r.report.status == imageops::MontageStatus::fail) fails.insert(sec.index);
    }
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.failed_sections.assign(fails.begin(), fails.end());
    failed.push_back(std::move(fails));
    report.rows.push_back(std::move(row));
  }
  const auto cols = error_columns(failed, corpus.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    report.rows[k].error_rate = cols[k].first;
    report.rows[k].accumulated_error = cols[k].second;
  }
  return report;
}

}  // namespace emflow::workflow
