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
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "cli.hpp"
#include "emflow/sim/em_dataset.hpp"
#include "emflow/sim/sweep_corpus.hpp"
#include "emflow/workflow/api_server.hpp"
#include "emflow/workflow/ingest.hpp"
#include "emflow/workflow/launcher.hpp"
#include "emflow/workflow/pipeline.hpp"
#include "emflow/workflow/stages.hpp"
#include "emflow/workflow/sweep.hpp"

namespace emflow::cli {
namespace fs = std::filesystem;
using nlohmann::json;
using namespace emflow::workflow;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

// Calls `stop` once SIGINT or SIGTERM arrives, until destroyed.
class InterruptWatch {
 public:
  explicit InterruptWatch(std::function<void()> stop) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    thread_ = std::thread([this, stop = std::move(stop)] {
      while (!done_) {
        if (g_interrupted) {
          stop();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
    });
  }
  ~InterruptWatch() {
    done_ = true;
    thread_.join();
  }

 private:
  std::atomic<bool> done_{false};
  std::thread thread_;
};

std::map<std::string, std::string> parse_tags(const std::vector<std::string>& flags) {
  std::map<std::string, std::string> out;
  for (const auto& f : flags) {
    const auto eq = f.find_first_of("=:");
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("tag must be key=value, got '" + f + "'");
    out[f.substr(0, eq)] = f.substr(eq + 1);
  }
  return out;
}

json parse_object(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  return j;
}

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw NotFound("cannot read " + p.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument(p.string() + " is not valid JSON");
  return j;
}

void print_jobs(std::ostream& os, const std::vector<JobRecord>& jobs) {
  os << std::left << std::setw(15) << "ID" << std::setw(9) << "STATE" << std::setw(13) << "APP" << std::setw(9)
     << "ATTEMPTS" << "TAGS\n";
  for (const auto& j : jobs) {
    std::string tags;
    for (const auto& [k, v] : j.tags) tags += (tags.empty() ? "" : " ") + k + "=" + v;
    os << std::setw(15) << j.id << std::setw(9) << state_name(j.state) << std::setw(13) << j.app << std::setw(9)
       << (std::to_string(j.attempts) + "/" + std::to_string(j.max_attempts)) << tags << '\n';
  }
}

std::string dataset_name_for(JobStore& store, const fs::path& root) {
  const auto name = DatasetLayout(root).load_config().name;
  register_dataset(store, root);
  return name;
}

void add_db(CLI::App& app, Context& ctx, Actions& actions) {
  auto* db = app.add_subcommand("db", "inspect and edit the job store");
  db->require_subcommand(1);
  {
    struct Args {
      std::string app, args_json, granularity, workdir;
      std::vector<std::string> args, deps, tags;
      int max_attempts = 3;
    };
    auto a = std::make_shared<Args>();
    auto* sub = db->add_subcommand("submit", "submit one job");
    sub->add_option("--app", a->app, "registered app name")->required();
    sub->add_option("--arg", a->args, "argument key=value (repeatable)");
    sub->add_option("--args-json", a->args_json, "arguments as one JSON object");
    sub->add_option("--dep", a->deps, "dependency job id (repeatable)");
    sub->add_option("--tag", a->tags, "tag key=value (repeatable)");
    sub->add_option("--max-attempts", a->max_attempts, "attempt limit");
    sub->add_option("--workdir", a->workdir, "working directory recorded with the job");
    sub->add_option("--register", a->granularity, "register the app with this granularity first")
        ->check(CLI::IsMember({"section", "section_pair", "subvolume", "volume"}));
    actions.add(sub, [&ctx, a] {
      JobStore store(ctx.store_path());
      if (!a->granularity.empty()) {
        store.register_app(a->app, parse_granularity(a->granularity));
      } else if (std::find(std::begin(kStageNames), std::end(kStageNames), a->app) != std::end(kStageNames)) {
        store.register_app(a->app, stage_granularity(a->app));
      }
      JobSpec spec;
      spec.app = a->app;
      spec.args = a->args_json.empty() ? json::object() : parse_object(a->args_json, "--args-json");
      for (const auto& f : a->args) {
        auto [k, v] = parse_assignment(f);
        spec.args[k] = v;
      }
      spec.deps = a->deps;
      spec.tags = parse_tags(a->tags);
      spec.max_attempts = a->max_attempts;
      spec.workdir = a->workdir;
      const auto rec = store.submit(spec);
      ctx.emit(rec, [&](std::ostream& os) { os << rec.id << ' ' << state_name(rec.state) << '\n'; });
    });
  }
  {
    struct Args {
      std::string state, app;
      std::vector<std::string> tags;
    };
    auto a = std::make_shared<Args>();
    auto* sub = db->add_subcommand("ls", "list jobs");
    sub->add_option("--state", a->state, "CREATED|READY|RUNNING|DONE|FAILED|KILLED");
    sub->add_option("--tag", a->tags, "tag key=value filter (repeatable)");
    sub->add_option("--app", a->app, "app name filter");
    actions.add(sub, [&ctx, a] {
      JobStore store(ctx.store_path());
      JobFilter f;
      if (!a->state.empty()) f.state = parse_state(a->state);
      if (!a->app.empty()) f.app = a->app;
      f.tags = parse_tags(a->tags);
      const auto jobs = store.list(f);
      json out = json::array();
      for (const auto& j : jobs) out.push_back(j);
      ctx.emit(out, [&](std::ostream& os) { print_jobs(os, jobs); });
    });
  }
  {
    auto id = std::make_shared<std::string>();
    auto* sub = db->add_subcommand("show", "one job with its transition log and output");
    sub->add_option("id", *id, "job id")->required();
    actions.add(sub, [&ctx, id] {
      JobStore store(ctx.store_path());
      const auto rec = store.get(*id);
      const auto log = store.transitions(*id);
      json tj = json::array();
      for (const auto& t : log) tj.push_back(t);
      const json out = {{"job", rec}, {"transitions", tj}, {"output", store.output_tail(*id)}};
      ctx.emit(out, [&](std::ostream& os) {
        os << json(rec).dump(2) << "\ntransitions:\n";
        for (const auto& t : log) {
          os << "  " << t.at << ' ' << (t.from ? state_name(*t.from) : std::string("-")) << " -> "
             << state_name(t.to) << (t.note.empty() ? "" : "  " + t.note) << '\n';
        }
        const auto tail = store.output_tail(*id);
        if (!tail.empty()) os << "output:\n" << tail << (tail.back() == '\n' ? "" : "\n");
      });
    });
  }
  {
    struct Args {
      std::string id;
      std::vector<std::string> params, args;
    };
    auto a = std::make_shared<Args>();
    auto* sub = db->add_subcommand("rerun", "copy a job with overrides");
    sub->add_option("id", a->id, "job id")->required();
    sub->add_option("--param,-p", a->params, "override of args.params key=value (repeatable)");
    sub->add_option("--arg", a->args, "override of a top-level arg key=value (repeatable)");
    actions.add(sub, [&ctx, a] {
      JobStore store(ctx.store_path());
      const auto orig = store.get(a->id);
      json patch = json::object();
      for (const auto& f : a->args) {
        auto [k, v] = parse_assignment(f);
        patch[k] = v;
      }
      if (!a->params.empty()) {
        json p = json::object();
        for (const auto& f : a->params) {
          auto [k, v] = parse_assignment(f);
          p[k] = v;
        }
        if (orig.tags.count("stage") && orig.args.contains("params")) {
          json merged = orig.args.at("params");
          merged.merge_patch(p);
          stage_params(orig.tags.at("stage"), merged);
        }
        patch["params"] = p;
      }
      const auto rec = store.rerun(a->id, patch);
      ctx.emit(rec, [&](std::ostream& os) { os << rec.id << ' ' << state_name(rec.state) << '\n'; });
    });
  }
  {
    auto id = std::make_shared<std::string>();
    auto* sub = db->add_subcommand("kill", "kill a job that has not finished");
    sub->add_option("id", *id, "job id")->required();
    actions.add(sub, [&ctx, id] {
      JobStore store(ctx.store_path());
      store.kill(*id, "killed from the command line");
      const auto rec = store.get(*id);
      ctx.emit(rec, [&](std::ostream& os) { os << rec.id << ' ' << state_name(rec.state) << '\n'; });
    });
  }
}

void add_launcher(CLI::App& app, Context& ctx, Actions& actions) {
  auto* launcher = app.add_subcommand("launcher", "elastic worker pool");
  launcher->require_subcommand(1);
  auto o = std::make_shared<LauncherOptions>();
  auto* sub = launcher->add_subcommand("run", "run jobs until stopped, idle or out of wall time");
  sub->add_option("--min-workers", o->policy.min_workers, "pool floor");
  sub->add_option("--max-workers", o->policy.max_workers, "pool ceiling");
  sub->add_option("--scale-up-backlog", o->policy.scale_up_backlog, "READY jobs per worker before growing");
  sub->add_option("--scale-down-idle", o->policy.scale_down_idle_s, "idle seconds before a worker retires");
  sub->add_option("--wall-limit", o->wall_limit_s, "seconds, 0 = none");
  sub->add_option("--min-lease", o->min_lease_s, "minimum RUNNING lease in seconds");
  sub->add_flag("--stop-when-idle", o->stop_when_idle, "exit once nothing is READY or RUNNING");
  actions.add(sub, [&ctx, o] {
    Launcher launcher(ctx.store_path(), pipeline_apps(), *o);
    LauncherSummary s;
    {
      InterruptWatch watch([&launcher] { launcher.request_stop(); });
      s = launcher.run();
    }
    ctx.emit(s, [&](std::ostream& os) {
      os << "done " << s.done << ", failed " << s.failed << ", peak workers " << s.peak_workers << ", wall "
         << std::fixed << std::setprecision(1) << s.wall_s << " s" << (s.hit_wall_limit ? " (wall limit)" : "")
         << '\n';
    });
  });
}

void add_pipeline(CLI::App& app, Context& ctx, Actions& actions) {
  auto* pipeline = app.add_subcommand("pipeline", "pipeline assembly");
  pipeline->require_subcommand(1);
  struct Args {
    std::string dataset, stages_file;
    std::vector<std::string> disable, params;
    int max_attempts = 0;
  };
  auto a = std::make_shared<Args>();
  auto* sub = pipeline->add_subcommand("define", "submit the full job DAG for a dataset");
  sub->add_option("--dataset,-d", a->dataset, "dataset name or root");
  sub->add_option("--stages", a->stages_file, "JSON stage config {stage: {enabled, params, max_attempts}}");
  sub->add_option("--disable", a->disable, "stage to disable (repeatable)");
  sub->add_option("--param,-p", a->params, "stage.key=value override (repeatable)");
  sub->add_option("--max-attempts", a->max_attempts, "attempt limit for every job");
  actions.add(sub, [&ctx, a] {
    JobStore store(ctx.store_path());
    const auto root = ctx.config.dataset_root(a->dataset);
    const auto name = dataset_name_for(store, root);
    json stages = default_pipeline_config();
    for (const auto& [stage, p] : ctx.config.params.items()) {
      if (!stages.contains(stage)) throw InvalidArgument("config has params for unknown stage '" + stage + "'");
      stages[stage]["params"] = p;
    }
    if (!a->stages_file.empty()) stages.merge_patch(read_json_file(a->stages_file));
    for (const auto& s : ctx.config.disabled_stages) stages[s]["enabled"] = false;
    for (const auto& s : a->disable) {
      if (!stages.contains(s)) throw InvalidArgument("unknown stage '" + s + "'");
      stages[s]["enabled"] = false;
    }
    for (const auto& f : a->params) {
      auto [key, v] = parse_assignment(f);
      const auto dot = key.find('.');
      if (dot == std::string::npos) throw InvalidArgument("--param needs stage.key=value, got '" + f + "'");
      stages[key.substr(0, dot)]["params"][key.substr(dot + 1)] = v;
    }
    if (a->max_attempts > 0)
      for (auto& [stage, conf] : stages.items()) conf["max_attempts"] = a->max_attempts;
    const auto jobs = define_pipeline(store, name, stages);
    json out = json::array();
    for (const auto& j : jobs) out.push_back(j);
    ctx.emit(out, [&](std::ostream& os) {
      os << "dataset " << name << ": " << jobs.size() << " jobs\n";
      print_jobs(os, jobs);
    });
  });
}

void add_sweep(CLI::App& app, Context& ctx, Actions& actions) {
  auto* sweep = app.add_subcommand("sweep", "montage parameter sweeps");
  sweep->require_subcommand(1);
  {
    struct Args {
      std::string corpus, sets_file, id;
      std::vector<std::string> sets;
      double tolerance = 0.02;
      bool no_store = false;
    };
    auto a = std::make_shared<Args>();
    auto* sub = sweep->add_subcommand("run", "run parameter sets in order over a corpus");
    sub->add_option("--corpus", a->corpus, "dataset name or root")->required();
    sub->add_option("--set", a->sets, "montage params as a JSON object (repeatable, in order)");
    sub->add_option("--sets-file", a->sets_file, "JSON array of parameter sets");
    sub->add_option("--size-tolerance", a->tolerance, "size check tolerance fraction");
    sub->add_option("--id", a->id, "report id");
    sub->add_flag("--no-store", a->no_store, "do not record the report in the job store");
    actions.add(sub, [&ctx, a] {
      SweepSpec spec;
      spec.id = a->id;
      spec.corpus = ctx.config.dataset_root(a->corpus);
      spec.size_tolerance = a->tolerance;
      if (!a->sets_file.empty()) {
        const auto sets = read_json_file(a->sets_file);
        if (!sets.is_array()) throw InvalidArgument(a->sets_file + " must hold a JSON array");
        for (const auto& s : sets) spec.parameter_sets.push_back(s);
      }
      for (const auto& s : a->sets) spec.parameter_sets.push_back(parse_object(s, "--set"));
      const auto report = run_sweep(spec);
      if (!a->no_store) JobStore(ctx.store_path()).put_sweep(report.id, report);
      ctx.emit(report, [&](std::ostream& os) {
        os << "sweep " << report.id << " over " << report.sections << " sections\n";
        os << std::left << std::setw(44) << "PARAMS" << std::setw(11) << "RUNTIME_S" << std::setw(12) << "ERROR_RATE"
           << "ACCUMULATED\n";
        for (const auto& r : report.rows) {
          os << std::setw(44) << r.params.dump() << std::setw(11) << std::fixed << std::setprecision(2)
             << r.runtime_s << std::setw(12) << std::setprecision(1) << (100.0 * r.error_rate) << std::setprecision(1)
             << 100.0 * r.accumulated_error << '\n';
        }
      });
    });
  }
  {
    auto p = std::make_shared<sim::SweepCorpusParams>();
    auto out = std::make_shared<std::string>();
    auto* sub = sweep->add_subcommand("corpus", "generate the tiered synthetic sweep corpus");
    sub->add_option("--output,-o", *out, "dataset root to create")->required();
    sub->add_option("--easy", p->easy_sections, "sections that always pass");
    sub->add_option("--per-tier", p->sections_per_tier, "sections per decoy tier");
    sub->add_option("--slip", p->slip_sections, "sections that always fail");
    sub->add_option("--tile-size", p->tile_size, "tile edge in pixels");
    sub->add_option("--decoy-px", p->decoy_px, "decoy displacement in pixels, at most tile-size/10");
    sub->add_option("--seed", p->seed, "random seed");
    actions.add(sub, [&ctx, p, out] {
      const auto sections = sim::generate_sweep_corpus(*out, *p);
      json rows = json::array();
      for (const auto& s : sections) rows.push_back({{"section", s.index}, {"tier", sim::tier_name(s.tier)}});
      ctx.emit({{"root", *out}, {"sections", rows}},
               [&](std::ostream& os) { os << "wrote " << sections.size() << " sections to " << *out << '\n'; });
    });
  }
}

void add_ingest(CLI::App& app, Context& ctx, Actions& actions) {
  auto* ingest = app.add_subcommand("ingest", "online section ingestion");
  ingest->require_subcommand(1);
  auto report = [&ctx](const IngestWatcher& w, const std::vector<JobRecord>& jobs) {
    json ev = json::array();
    for (const auto& e : w.accepted()) ev.push_back(e);
    json ids = json::array();
    for (const auto& j : jobs) ids.push_back(j.id);
    ctx.emit({{"dataset", w.dataset()}, {"events", ev}, {"jobs", ids}, {"duplicates", w.duplicates()}},
             [&](std::ostream& os) {
               os << "ingested " << jobs.size() << " sections into " << w.dataset() << " (" << w.duplicates()
                  << " duplicates ignored)\n";
             });
  };
  {
    auto p = std::make_shared<sim::EmDatasetParams>();
    auto o = std::make_shared<IngestOptions>();
    auto out = std::make_shared<std::string>();
    auto params = std::make_shared<std::vector<std::string>>();
    auto* sub = ingest->add_subcommand("sim", "simulated microscope acquiring sections on a cadence");
    sub->add_option("--output,-o", *out, "dataset root (created if missing)")->required();
    sub->add_option("--name", p->name, "dataset name");
    sub->add_option("--sections,-n", o->num_sections, "sections to acquire");
    sub->add_option("--cadence", o->cadence_s, "seconds between sections");
    sub->add_option("--first", o->first_section, "first section index");
    sub->add_option("--seed", p->seed, "random seed");
    sub->add_option("--param,-p", *params, "montage param override key=value (repeatable)");
    actions.add(sub, [&ctx, p, o, out, params, report] {
      p->sections = static_cast<int>(o->first_section) + o->num_sections;
      const sim::EmSimulator microscope(*p);
      create_dataset(*out, microscope.config());
      JobStore store(ctx.store_path());
      register_dataset(store, *out);
      IngestWatcher w(store, p->name, merged_params(ctx, "montage", *params));
      std::atomic<bool> stop{false};
      o->stop = &stop;
      std::vector<JobRecord> jobs;
      {
        InterruptWatch watch([&stop] { stop = true; });
        jobs = ingest_simulated(w, microscope, *o);
      }
      report(w, jobs);
    });
  }
  {
    auto o = std::make_shared<IngestOptions>();
    auto dataset = std::make_shared<std::string>();
    auto params = std::make_shared<std::vector<std::string>>();
    auto* sub = ingest->add_subcommand("watch", "watch a dataset directory for new sections");
    sub->add_option("--dataset,-d", *dataset, "dataset name or root");
    sub->add_option("--sections,-n", o->num_sections, "stop after this many new sections");
    sub->add_option("--poll", o->poll_s, "poll interval in seconds");
    sub->add_option("--timeout", o->timeout_s, "give up after this many seconds, 0 = never");
    sub->add_option("--param,-p", *params, "montage param override key=value (repeatable)");
    actions.add(sub, [&ctx, o, dataset, params, report] {
      JobStore store(ctx.store_path());
      const auto root = ctx.config.dataset_root(*dataset);
      const auto name = dataset_name_for(store, root);
      IngestWatcher w(store, name, merged_params(ctx, "montage", *params));
      std::atomic<bool> stop{false};
      o->stop = &stop;
      std::vector<JobRecord> jobs;
      {
        InterruptWatch watch([&stop] { stop = true; });
        jobs = ingest_watch_directory(w, *o);
      }
      report(w, jobs);
    });
  }
}

void add_serve(CLI::App& app, Context& ctx, Actions& actions) {
  auto bind = std::make_shared<std::string>();
  auto* sub = app.add_subcommand("serve", "HTTP API for the operator console");
  sub->add_option("--bind", *bind, "host:port (default from the config, else 127.0.0.1:8080)");
  actions.add(sub, [&ctx, bind] {
    const auto [host, port] = parse_bind(bind->empty() ? ctx.config.bind : *bind);
    ApiServer server({ctx.store_path(), host, port});
    const int bound = server.bind();
    if (ctx.json) {
      std::cout << json{{"host", host}, {"port", bound}}.dump() << std::endl;
    } else {
      std::cout << "serving on http://" << host << ":" << bound << std::endl;
    }
    InterruptWatch watch([&server] { server.stop(); });
    server.listen();
  });
}

}  // namespace

void add_workflow_commands(CLI::App& app, Context& ctx, Actions& actions) {
  add_db(app, ctx, actions);
  add_launcher(app, ctx, actions);
  add_pipeline(app, ctx, actions);
  add_sweep(app, ctx, actions);
  add_ingest(app, ctx, actions);
  add_serve(app, ctx, actions);
}

}  // namespace emflow::cli
