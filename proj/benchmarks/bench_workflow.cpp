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

#include <benchmark/benchmark.h>

#include <filesystem>

#include "emflow/workflow/job_store.hpp"

using namespace emflow::workflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_store(const char* name) {
  const auto p = fs::temp_directory_path() / name;
  fs::remove(p);
  fs::remove(p.string() + "-wal");
  fs::remove(p.string() + "-shm");
  return p;
}

void BM_SubmitClaimComplete(benchmark::State& state) {
  const auto path = fresh_store("emflow_bench_store.db");
  {
    JobStore store(path);
    store.register_app("noop", Granularity::volume);
    JobSpec spec;
    spec.app = "noop";
    for (auto _ : state) {
      const auto rec = store.submit(spec);
      const auto claimed = store.claim_next("w0");
      store.complete(claimed->id, "w0", Outcome::done);
      benchmark::DoNotOptimize(rec);
    }
  }
  fs::remove(path);
}
BENCHMARK(BM_SubmitClaimComplete)->Unit(benchmark::kMicrosecond);

void BM_ListByTag(benchmark::State& state) {
  const auto path = fresh_store("emflow_bench_list.db");
  {
    JobStore store(path);
    store.register_app("noop", Granularity::section);
    for (std::int64_t i = 0; i < state.range(0); ++i) {
      JobSpec spec;
      spec.app = "noop";
      spec.tags = {{"section", std::to_string(i % 50)}};
      store.submit(spec);
    }
    JobFilter f;
    f.tags = {{"section", "7"}};
    for (auto _ : state) benchmark::DoNotOptimize(store.list(f));
  }
  fs::remove(path);
}
BENCHMARK(BM_ListByTag)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

}  // namespace
