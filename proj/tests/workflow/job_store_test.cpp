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

#include "doctest.h"

#include <atomic>
#include <regex>
#include <set>
#include <thread>

#include "audit.hpp"
#include "emflow/types.hpp"
#include "emflow/workflow/job_store.hpp"
#include "test_util.hpp"

using namespace emflow;
using namespace emflow::workflow;
using emflow::testing::TempDir;

namespace {

struct Fixture {
  TempDir dir{"store"};
  JobStore store{dir / "jobs.db"};
  Fixture() {
    store.register_app("noop", Granularity::volume);
    store.register_app("montage", Granularity::section);
  }
  JobRecord submit(std::vector<std::string> deps = {}, int max_attempts = 3) {
    JobSpec s;
    s.app = "noop";
    s.deps = std::move(deps);
    s.max_attempts = max_attempts;
    return store.submit(s);
  }
  void run_to_done(const std::string& worker = "w") {
    auto j = store.claim_next(worker);
    REQUIRE(j);
    store.complete(j->id, worker, Outcome::done);
  }
};

}  // namespace

TEST_CASE("state names roundtrip") {
  for (auto s : {JobState::created, JobState::ready, JobState::running, JobState::done, JobState::failed,
                 JobState::killed}) {
    CHECK(parse_state(state_name(s)) == s);
  }
  CHECK_THROWS_AS(parse_state("BOGUS"), InvalidArgument);
  CHECK(parse_granularity("section_pair") == Granularity::section_pair);
}

TEST_CASE("timestamps are UTC ISO-8601 with milliseconds") {
  const std::regex iso(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{3}Z)");
  CHECK(std::regex_match(utc_now_iso(), iso));
  CHECK(to_iso(0.0) == "1970-01-01T00:00:00.000Z");
  CHECK(to_iso(86400.9995) == "1970-01-02T00:00:01.000Z");
  Fixture f;
  const auto j = f.submit();
  REQUIRE(j.timestamps.count("CREATED"));
  CHECK(std::regex_match(j.timestamps.at("READY"), iso));
}

TEST_CASE("submit promotes to READY only when deps are DONE") {
  Fixture f;
  const auto a = f.submit();
  CHECK(a.state == JobState::ready);
  CHECK(a.attempts == 0);
  const auto b = f.submit({a.id});
  CHECK(b.state == JobState::created);
  auto claimed = f.store.claim_next("w1");
  REQUIRE(claimed);
  CHECK(claimed->id == a.id);
  CHECK(f.store.get(b.id).state == JobState::created);
  f.store.complete(a.id, "w1", Outcome::done, "ok");
  CHECK(f.store.get(b.id).state == JobState::ready);
  CHECK(f.store.get(a.id).detail == "ok");
  CHECK_FALSE(f.store.get(a.id).worker_id);

  const auto c = f.submit({a.id});
  CHECK(c.state == JobState::ready);
}

TEST_CASE("submit errors") {
  Fixture f;
  JobSpec s;
  s.app = "missing";
  CHECK_THROWS_AS(f.store.submit(s), NotFound);
  s.app = "noop";
  s.deps = {"jdoesnotexist"};
  CHECK_THROWS_AS(f.store.submit(s), NotFound);
  s.deps.clear();
  s.max_attempts = 0;
  CHECK_THROWS_AS(f.store.submit(s), InvalidArgument);
  s.max_attempts = 1;
  s.args = nlohmann::json::array();
  CHECK_THROWS_AS(f.store.submit(s), InvalidArgument);
  CHECK(f.store.list().empty());
}

TEST_CASE("100 submissions give 100 distinct queryable ids") {
  Fixture f;
  std::set<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.insert(f.submit().id);
  CHECK(ids.size() == 100);
  for (const auto& id : ids) CHECK(f.store.get(id).id == id);
  CHECK(f.store.list().size() == 100);
  CHECK(f.store.count(JobState::ready) == 100);
}

TEST_CASE("claim is FIFO and empty queue gives none") {
  Fixture f;
  CHECK_FALSE(f.store.claim_next("w"));
  std::vector<std::string> order;
  for (int i = 0; i < 10; ++i) order.push_back(f.submit().id);
  for (int i = 0; i < 10; ++i) {
    auto j = f.store.claim_next("w");
    REQUIRE(j);
    CHECK(j->id == order[static_cast<std::size_t>(i)]);
    CHECK(j->state == JobState::running);
    CHECK(j->worker_id == "w");
    CHECK(j->attempts == 1);
  }
  CHECK_FALSE(f.store.claim_next("w"));
  CHECK_THROWS_AS(f.store.claim_next(""), InvalidArgument);
}

TEST_CASE("one READY job and 8 concurrent claimers give exactly one success") {
  TempDir dir("claim");
  const auto path = dir / "jobs.db";
  for (int round = 0; round < 5; ++round) {
    std::string id;
    {
      JobStore s(path);
      s.register_app("noop", Granularity::volume);
      id = s.submit({"noop"}).id;
    }
    std::atomic<int> wins{0};
    std::atomic<int> go{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        JobStore s(path);
        ++go;
        while (go < 8) std::this_thread::yield();
        if (s.claim_next("w" + std::to_string(t))) ++wins;
      });
    }
    for (auto& t : threads) t.join();
    CHECK(wins == 1);
    JobStore s(path);
    CHECK(s.get(id).state == JobState::running);
    // the job stays RUNNING, so later rounds only see their own job
  }
}

TEST_CASE("two failures then success ends DONE with 3 attempts") {
  Fixture f;
  const auto a = f.submit({}, 3);
  for (int i = 0; i < 2; ++i) {
    auto j = f.store.claim_next("w");
    REQUIRE(j);
    f.store.complete(j->id, "w", Outcome::failed, "boom");
    CHECK(f.store.get(a.id).state == JobState::ready);
  }
  f.run_to_done();
  const auto r = f.store.get(a.id);
  CHECK(r.state == JobState::done);
  CHECK(r.attempts == 3);

  std::vector<std::string> walk;
  for (const auto& t : f.store.transitions(a.id)) walk.push_back(state_name(t.to));
  CHECK(walk == std::vector<std::string>{"CREATED", "READY", "RUNNING", "FAILED", "READY", "RUNNING", "FAILED",
                                         "READY", "RUNNING", "DONE"});
  CHECK(emflow::testing::audit_log(f.store).empty());
}

TEST_CASE("terminal FAILED blocks dependents") {
  Fixture f;
  const auto a = f.submit({}, 2);
  const auto b = f.submit({a.id});
  for (int i = 0; i < 2; ++i) {
    auto j = f.store.claim_next("w");
    REQUIRE(j);
    CHECK(j->id == a.id);
    f.store.complete(a.id, "w", Outcome::failed, "bad input");
  }
  CHECK(f.store.get(a.id).state == JobState::failed);
  CHECK(f.store.get(a.id).attempts == 2);
  CHECK(f.store.get(b.id).state == JobState::created);
  CHECK_FALSE(f.store.claim_next("w"));
}

TEST_CASE("complete checks state and owner") {
  Fixture f;
  const auto a = f.submit();
  CHECK_THROWS_AS(f.store.complete(a.id, "w", Outcome::done), Conflict);
  f.store.claim_next("w1");
  CHECK_THROWS_AS(f.store.complete(a.id, "w2", Outcome::done), Conflict);
  CHECK_THROWS_AS(f.store.complete("jnope", "w1", Outcome::done), NotFound);
  f.store.complete(a.id, "w1", Outcome::done);
  CHECK_THROWS_AS(f.store.complete(a.id, "w1", Outcome::done), Conflict);
}

TEST_CASE("kill from any non-terminal state") {
  Fixture f;
  const auto a = f.submit();
  const auto b = f.submit({a.id});
  const auto c = f.submit();
  f.store.kill(b.id);
  CHECK(f.store.get(b.id).state == JobState::killed);
  auto j = f.store.claim_next("w");
  REQUIRE(j);
  CHECK(j->id == a.id);
  f.store.kill(a.id, "operator");
  CHECK(f.store.get(a.id).state == JobState::killed);
  CHECK_THROWS_AS(f.store.complete(a.id, "w", Outcome::done), Conflict);
  f.store.kill(c.id);
  CHECK_THROWS_AS(f.store.kill(c.id), Conflict);
  CHECK(f.store.transitions(a.id).back().note == "operator");
}

TEST_CASE("rerun copies deps, merges overrides and links the original") {
  Fixture f;
  const auto dep = f.submit();
  JobSpec s;
  s.app = "montage";
  s.args = {{"section", 3}, {"params", {{"min_octave", 64}, {"max_octave", 256}}}};
  s.deps = {dep.id};
  s.tags = {{"dataset", "d1"}, {"section", "3"}};
  s.workdir = "/tmp/x";
  const auto orig = f.store.submit(s);
  const auto before = f.store.list().size();
  const auto copy = f.store.rerun(orig.id, {{"params", {{"min_octave", 32}}}});
  CHECK(f.store.list().size() == before + 1);
  CHECK(copy.id != orig.id);
  CHECK(copy.deps == orig.deps);
  CHECK(copy.app == "montage");
  CHECK(copy.args["section"] == 3);
  CHECK(copy.args["params"]["min_octave"] == 32);
  CHECK(copy.args["params"]["max_octave"] == 256);
  CHECK(copy.tags.at("rerun_of") == orig.id);
  CHECK(copy.tags.at("dataset") == "d1");
  CHECK(copy.workdir == "/tmp/x");
  CHECK(copy.state == JobState::created);
  CHECK_THROWS_AS(f.store.rerun("jmissing"), NotFound);
  CHECK_THROWS_AS(f.store.rerun(orig.id, nlohmann::json::array()), InvalidArgument);
}

TEST_CASE("list filters by state, app and tags") {
  Fixture f;
  for (int i = 0; i < 4; ++i) {
    JobSpec s;
    s.app = "montage";
    s.tags = {{"dataset", i % 2 ? "odd" : "even"}, {"section", std::to_string(i)}};
    f.store.submit(s);
  }
  f.submit();
  f.store.claim_next("w");
  CHECK(f.store.list({JobState::ready, {}, {}}).size() == 4);
  CHECK(f.store.list({JobState::running, {}, {}}).size() == 1);
  CHECK(f.store.list({std::nullopt, {{"dataset", "odd"}}, {}}).size() == 2);
  CHECK(f.store.list({std::nullopt, {{"dataset", "odd"}, {"section", "3"}}, {}}).size() == 1);
  CHECK(f.store.list({std::nullopt, {}, std::string("noop")}).size() == 1);
  for (const auto& r : f.store.list({JobState::ready, {}, {}})) CHECK(r.state == JobState::ready);
  const auto c = f.store.counts();
  CHECK(c.at(JobState::ready) == 4);
  CHECK(c.at(JobState::running) == 1);
  CHECK(c.at(JobState::done) == 0);
}

TEST_CASE("output tail keeps the end") {
  Fixture f;
  const auto a = f.submit();
  CHECK(f.store.output_tail(a.id).empty());
  f.store.append_output(a.id, "hello\n");
  f.store.append_output(a.id, "world\n");
  CHECK(f.store.output_tail(a.id) == "hello\nworld\n");
  CHECK(f.store.output_tail(a.id, 6) == "world\n");
  f.store.append_output(a.id, std::string(JobStore::kOutputKeep, 'x') + "END");
  const auto all = f.store.output_tail(a.id, JobStore::kOutputKeep * 2);
  CHECK(all.size() == JobStore::kOutputKeep);
  CHECK(all.substr(all.size() - 3) == "END");
  CHECK_THROWS_AS(f.store.append_output("jnone", "x"), NotFound);
}

TEST_CASE("stale RUNNING jobs return to READY after the lease") {
  Fixture f;
  const auto a = f.submit({}, 3);
  f.store.claim_next("dead-worker");
  CHECK(f.store.requeue_stale(60.0).empty());
  CHECK(f.store.lease_seconds("noop", 60.0) == 60.0);
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  const auto touched = f.store.requeue_stale(0.01);
  CHECK(touched == std::vector<std::string>{a.id});
  const auto r = f.store.get(a.id);
  CHECK(r.state == JobState::ready);
  CHECK_FALSE(r.worker_id);
  CHECK_THROWS_AS(f.store.complete(a.id, "dead-worker", Outcome::done), Conflict);
  f.run_to_done("live");
  CHECK(f.store.get(a.id).state == JobState::done);
  CHECK(emflow::testing::audit_log(f.store).empty());
}

TEST_CASE("a stale job out of attempts fails") {
  Fixture f;
  const auto a = f.submit({}, 1);
  f.store.claim_next("dead");
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  f.store.requeue_stale(0.01);
  CHECK(f.store.get(a.id).state == JobState::failed);
}

TEST_CASE("lease is 10x the moving average runtime") {
  Fixture f;
  f.submit();
  auto j = f.store.claim_next("w");
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  f.store.complete(j->id, "w", Outcome::done);
  const auto app = f.store.app("noop");
  REQUIRE(app.avg_runtime_s);
  CHECK(app.runs == 1);
  CHECK(*app.avg_runtime_s >= 0.05);
  CHECK(f.store.lease_seconds("noop", 0.0) == doctest::Approx(10.0 * *app.avg_runtime_s));
  CHECK(f.store.lease_seconds("noop", 60.0) == 60.0);
  CHECK_THROWS_AS(f.store.app("nope"), NotFound);
}

TEST_CASE("register_app reports new names") {
  Fixture f;
  CHECK(f.store.register_app("segment", Granularity::subvolume));
  CHECK_FALSE(f.store.register_app("segment", Granularity::subvolume));
  CHECK(f.store.apps().size() == 3);
}

TEST_CASE("datasets, sweeps, reviews and meta persist across connections") {
  TempDir dir("meta");
  {
    JobStore s(dir / "jobs.db");
    s.put_dataset({"d1", "/data/d1", {{"sections", 4}}, ""});
    s.put_sweep("sw1", {{"rows", nlohmann::json::array({1, 2})}});
    s.put_review("d1", 2, "approve", "");
    s.set_meta("k", "v");
  }
  JobStore s(dir / "jobs.db");
  CHECK(s.dataset("d1").info["sections"] == 4);
  CHECK(s.dataset("d1").root == "/data/d1");
  CHECK(s.datasets().size() == 1);
  CHECK_THROWS_AS(s.dataset("d2"), NotFound);
  CHECK(s.sweep("sw1")["rows"].size() == 2);
  CHECK_THROWS_AS(s.sweep("sw2"), NotFound);
  CHECK(s.reviews("d1")[0]["verdict"] == "approve");
  CHECK(s.meta("k") == "v");
  CHECK_FALSE(s.meta("absent"));
}

TEST_CASE("random DAG drained by 8 threads: no double claims, deps respected") {
  TempDir dir("dag");
  const auto path = dir / "jobs.db";
  const auto dag = emflow::testing::random_dag(120, 3, 7);
  std::vector<std::string> ids;
  {
    JobStore s(path);
    s.register_app("noop", Granularity::volume);
    for (const auto& deps : dag) {
      JobSpec spec{"noop"};
      for (auto d : deps) spec.deps.push_back(ids[d]);
      ids.push_back(s.submit(spec).id);
    }
  }
  std::mutex m;
  std::multiset<std::string> claimed;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      JobStore s(path);
      const std::string w = "w" + std::to_string(t);
      int idle = 0;
      while (idle < 200) {
        auto j = s.claim_next(w);
        if (!j) {
          ++idle;
          std::this_thread::sleep_for(std::chrono::milliseconds(1));
          continue;
        }
        idle = 0;
        {
          std::lock_guard lock(m);
          claimed.insert(j->id);
        }
        s.complete(j->id, w, Outcome::done);
      }
    });
  }
  for (auto& t : threads) t.join();
  JobStore s(path);
  CHECK(claimed.size() == ids.size());
  CHECK(std::set<std::string>(claimed.begin(), claimed.end()).size() == ids.size());
  CHECK(s.count(JobState::done) == ids.size());
  const auto problems = emflow::testing::audit_log(s);
  CHECK(problems.empty());
}

TEST_CASE("rerun of a failed job unblocks its waiting dependents") {
  Fixture f;
  const auto a = f.submit({}, 1);
  const auto b = f.submit({a.id});
  f.store.claim_next("w");
  f.store.complete(a.id, "w", Outcome::failed, "bad");
  REQUIRE(f.store.get(a.id).state == JobState::failed);
  const auto again = f.store.rerun(a.id);
  CHECK(again.state == JobState::ready);
  CHECK(f.store.get(b.id).deps == std::vector<std::string>{again.id});
  f.run_to_done();
  CHECK(f.store.get(b.id).state == JobState::ready);
  f.run_to_done();
  CHECK(emflow::testing::audit_log(f.store).empty());
}

TEST_CASE("rerun leaves started dependents alone") {
  Fixture f;
  const auto a = f.submit();
  const auto b = f.submit({a.id});
  f.run_to_done();
  REQUIRE(f.store.get(b.id).state == JobState::ready);
  f.store.rerun(a.id);
  CHECK(f.store.get(b.id).deps == std::vector<std::string>{a.id});
}
