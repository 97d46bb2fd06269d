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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "emflow/sim/sweep_corpus.hpp"
#include "emflow/workflow/job_store.hpp"
#include "emflow/workflow/sweep.hpp"
#include "test_util.hpp"

using namespace emflow;
using namespace emflow::workflow;
using emflow::testing::TempDir;

namespace {

std::set<std::int64_t> range_set(std::int64_t lo, std::int64_t hi) {
  std::set<std::int64_t> s;
  for (auto i = lo; i <= hi; ++i) s.insert(i);
  return s;
}

}  // namespace

TEST_CASE("error columns for nested failure sets") {
  const auto cols = error_columns({range_set(1, 35), range_set(1, 10)}, 100);
  REQUIRE(cols.size() == 2);
  CHECK(cols[0].first == doctest::Approx(0.35));
  CHECK(cols[0].second == doctest::Approx(0.35));
  CHECK(cols[1].first == doctest::Approx(0.10));
  CHECK(cols[1].second == doctest::Approx(0.10));
}

TEST_CASE("accumulated error counts sections failing every set so far") {
  const auto cols = error_columns({range_set(1, 10), range_set(6, 20), range_set(1, 7)}, 50);
  CHECK(cols[0].second == doctest::Approx(0.2));
  CHECK(cols[1].first == doctest::Approx(0.3));
  CHECK(cols[1].second == doctest::Approx(0.1));
  CHECK(cols[2].second == doctest::Approx(0.04));
  CHECK_THROWS_AS(error_columns({range_set(1, 2)}, 0), InvalidArgument);
}

TEST_CASE("accumulated error is non-increasing and order free in its final value") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 40;
    std::vector<std::set<std::int64_t>> sets(1 + rng() % 6);
    for (auto& s : sets)
      for (std::size_t i = 0; i < n; ++i)
        if (rng() % 3 != 0) s.insert(static_cast<std::int64_t>(i));
    const auto cols = error_columns(sets, n);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      CHECK(cols[k].second <= cols[k].first);
      if (k > 0) CHECK(cols[k].second <= cols[k - 1].second);
    }
    auto shuffled = sets;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = error_columns(shuffled, n);
    CHECK(again.back().second == doctest::Approx(cols.back().second));
  }
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec;
  spec.corpus = "/nonexistent";
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.parameter_sets = {{{"no_such_param", 1}}};
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.parameter_sets = {{{"max_octave_px", 256}}};
  CHECK_NOTHROW(spec.validate());
  CHECK_THROWS_AS(run_sweep(spec), NotFound);
}

TEST_CASE("sweep over the tiered corpus widens to the floor") {
  TempDir dir("sweep");
  sim::SweepCorpusParams cp;
  cp.easy_sections = 1;
  cp.sections_per_tier = 1;
  cp.slip_sections = 1;
  const auto sections = sim::generate_sweep_corpus(dir / "corpus", cp);
  REQUIRE(sections.size() == 5);

  SweepSpec spec;
  spec.id = "widen";
  spec.corpus = dir / "corpus";
  const std::vector<std::int64_t> maxes{128, 256, 512, 1024};
  for (auto m : maxes) spec.parameter_sets.push_back({{"min_octave_px", 64}, {"max_octave_px", m}});
  const auto report = run_sweep(spec);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.sections == 5);
  for (std::size_t k = 0; k < maxes.size(); ++k) {
    std::vector<std::int64_t> expected;
    for (const auto& s : sections)
      if (sim::expected_failure(s.tier, cp.tile_size, maxes[k])) expected.push_back(s.index);
    CHECK(report.rows[k].failed_sections == expected);
    CHECK(report.rows[k].runtime_s > 0.0);
    if (k > 0) CHECK(report.rows[k].failed_sections.size() <= report.rows[k - 1].failed_sections.size());
  }
  CHECK(report.rows.back().accumulated_error == doctest::Approx(0.2));  // the slip section

  JobStore store(dir / "jobs.db");
  store.put_sweep(report.id, report);
  const auto back = store.sweep("widen");
  CHECK(back.at("rows").size() == 4);
  CHECK(back.at("rows")[3].at("accumulated_error").get<double>() == doctest::Approx(0.2));
}

TEST_CASE("expected failure by tier") {
  using sim::CorpusTier;
  CHECK_FALSE(sim::expected_failure(CorpusTier::easy, 1024, 128));
  CHECK(sim::expected_failure(CorpusTier::slip, 1024, 1024));
  CHECK(sim::expected_failure(CorpusTier::decoy2, 1024, 128));
  CHECK_FALSE(sim::expected_failure(CorpusTier::decoy2, 1024, 256));
  CHECK(sim::expected_failure(CorpusTier::decoy0, 1024, 512));
  CHECK_FALSE(sim::expected_failure(CorpusTier::decoy0, 1024, 1024));
}
