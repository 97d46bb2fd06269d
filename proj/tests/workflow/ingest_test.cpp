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

#include <atomic>
#include <chrono>
#include <thread>

#include "doctest.h"
#include "emflow/sim/em_dataset.hpp"
#include "emflow/workflow/ingest.hpp"
#include "emflow/workflow/launcher.hpp"
#include "emflow/workflow/pipeline.hpp"
#include "emflow/workflow/stages.hpp"
#include "test_util.hpp"

using namespace emflow;
using namespace emflow::workflow;
using emflow::testing::TempDir;

namespace {

struct Fixture {
  TempDir dir{"ingest"};
  sim::EmSimulator microscope{[] {
    sim::EmDatasetParams p;
    p.name = "live";
    p.sections = 6;
    return p;
  }()};
  JobStore store{dir / "jobs.db"};

  Fixture() {
    create_dataset(dir / "live", microscope.config());
    register_dataset(store, dir / "live");
  }
};

}  // namespace

TEST_CASE("minimum pool for a cadence") {
  CHECK(minimum_pool(440.0, 20.0) == 22);
  CHECK(minimum_pool(1.0, 2.0) == 1);
  CHECK(minimum_pool(10.0, 2.0) == 5);
  CHECK(minimum_pool(0.0, 2.0) == 1);
  CHECK_THROWS_AS(minimum_pool(1.0, 0.0), InvalidArgument);
}

TEST_CASE("events become tagged montage jobs and duplicates are ignored") {
  Fixture fx;
  IngestWatcher w(fx.store, "live");
  for (std::int64_t s : {0, 1, 2}) REQUIRE(w.handle({s, epoch_now(), {}}));
  const auto jobs = fx.store.list({});
  REQUIRE(jobs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(jobs[i].app == "montage");
    CHECK(jobs[i].tags.at("section") == std::to_string(i));
    CHECK(jobs[i].tags.at("dataset") == "live");
    CHECK(jobs[i].state == JobState::ready);
  }
  CHECK_FALSE(w.handle({1, epoch_now(), {}}));
  CHECK(fx.store.list({}).size() == 3);
  CHECK(w.duplicates() == 1);
  CHECK(w.accepted().size() == 3);

  // a second watcher sees the jobs already in the store
  IngestWatcher again(fx.store, "live");
  CHECK_FALSE(again.handle({2, epoch_now(), {}}));
  CHECK(fx.store.list({}).size() == 3);
}

TEST_CASE("watcher needs a registered dataset") {
  Fixture fx;
  CHECK_THROWS_AS(IngestWatcher(fx.store, "other"), NotFound);
  CHECK_THROWS_AS(IngestWatcher(fx.store, "live", nlohmann::json::array()), InvalidArgument);
}

TEST_CASE("simulated microscope keeps its cadence") {
  Fixture fx;
  IngestWatcher w(fx.store, "live");
  IngestOptions o;
  o.cadence_s = 0.1;
  o.num_sections = 3;
  const auto jobs = ingest_simulated(w, fx.microscope, o);
  REQUIRE(jobs.size() == 3);
  const DatasetLayout layout(fx.dir / "live");
  CHECK(layout.sections() == std::vector<std::int64_t>{0, 1, 2});
  const auto& ev = w.accepted();
  CHECK(ev[2].arrival - ev[0].arrival >= 0.15);
  CHECK(ev[0].tile_paths.size() == 2);
  CHECK(std::filesystem::exists(ev[0].tile_paths[0]));
}

TEST_CASE("directory watch picks up sections as they land") {
  Fixture fx;
  const DatasetLayout layout(fx.dir / "live");
  fx.microscope.acquire(layout, 0);
  submit_montage(fx.store, "live", 0);  // already known
  std::thread writer([&] {
    for (std::int64_t s = 1; s <= 3; ++s) {
      std::this_thread::sleep_for(std::chrono::milliseconds(60));
      fx.microscope.acquire(layout, s);
    }
  });
  IngestWatcher w(fx.store, "live");
  IngestOptions o;
  o.num_sections = 3;
  o.poll_s = 0.02;
  o.timeout_s = 10.0;
  const auto jobs = ingest_watch_directory(w, o);
  writer.join();
  REQUIRE(jobs.size() == 3);
  CHECK(jobs[0].tags.at("section") == "1");
  CHECK(jobs[2].tags.at("section") == "3");
  CHECK(w.duplicates() == 1);
  CHECK(fx.store.list({}).size() == 4);
}

TEST_CASE("directory watch stops on timeout and on request") {
  Fixture fx;
  IngestWatcher w(fx.store, "live");
  IngestOptions o;
  o.num_sections = 2;
  o.poll_s = 0.02;
  o.timeout_s = 0.1;
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(ingest_watch_directory(w, o).empty());
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(2));

  std::atomic<bool> stop{true};
  o.timeout_s = 0;
  o.stop = &stop;
  CHECK(ingest_watch_directory(w, o).empty());
}

TEST_CASE("ingested montages run to DONE under a live launcher") {
  Fixture fx;
  LauncherOptions lo;
  lo.policy = {1, 2, 1.0, 0.5};
  lo.tick_s = 0.02;
  lo.poll_s = 0.01;
  lo.wall_limit_s = 60;
  Launcher launcher(fx.dir / "jobs.db", pipeline_apps(), lo);
  LauncherSummary summary;
  std::thread runner([&] { summary = launcher.run(); });

  IngestWatcher w(fx.store, "live");
  IngestOptions o;
  o.cadence_s = 0.1;
  o.num_sections = 3;
  ingest_simulated(w, fx.microscope, o);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
  while (fx.store.count(JobState::done) < 3 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  launcher.request_stop();
  runner.join();
  CHECK(fx.store.count(JobState::done) == 3);
  CHECK(summary.done == 3);
  const DatasetLayout layout(fx.dir / "live");
  for (std::int64_t s = 0; s < 3; ++s) CHECK(std::filesystem::exists(layout.montage_image(s)));
}
