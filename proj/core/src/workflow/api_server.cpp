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

#include "emflow/workflow/api_server.hpp"

#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "emflow/imageops/montage.hpp"
#include "emflow/segmenter/types.hpp"
#include "emflow/workflow/dataset.hpp"
#include "emflow/workflow/job_store.hpp"
#include "emflow/workflow/launcher.hpp"
#include "emflow/workflow/pipeline.hpp"
#include "emflow/workflow/preview.hpp"
#include "emflow/workflow/stages.hpp"

namespace emflow::workflow {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("request body is not valid JSON");
  if (!j.is_object()) throw InvalidArgument("request body must be a JSON object");
  return j;
}

std::optional<json> read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

std::int64_t parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidArgument(std::string("invalid ") + what + " '" + s + "'");
}

json job_detail(const JobStore& store, const std::string& id) {
  const auto rec = store.get(id);
  json transitions = json::array();
  for (const auto& t : store.transitions(id)) transitions.push_back(t);
  return {{"job", rec}, {"transitions", transitions}, {"output", store.output_tail(id)}};
}

}  // namespace

struct ApiServer::Impl {
  ApiOptions options;
  JobStore store;
  httplib::Server server;
  std::thread thread;
  int port = -1;
  std::mutex token_mutex;

  explicit Impl(ApiOptions o) : options(std::move(o)), store(options.store_path) {
    // SO_REUSEADDR only, so a port held by another server fails to bind
    server.set_socket_options([](int sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  template <class F>
  httplib::Server::Handler guard(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const NotFound& e) {
        send(res, 404, {{"error", e.what()}});
      } catch (const InvalidArgument& e) {
        send(res, 400, {{"error", e.what()}});
      } catch (const Conflict& e) {
        send(res, 409, {{"error", e.what()}});
      } catch (const json::exception& e) {
        send(res, 400, {{"error", e.what()}});
      } catch (const std::exception& e) {
        spdlog::error("api: {} {}: {}", req.method, req.path, e.what());
        send(res, 500, {{"error", e.what()}});
      }
    };
  }

  // Runs `make` once per client token; repeats return the first job.
  JobRecord once(const json& body, const std::string& scope, const std::function<JobRecord()>& make) {
    if (!body.contains("token")) return make();
    const auto key = "api.token." + scope + "." + body.at("token").get<std::string>();
    std::lock_guard lock(token_mutex);
    if (auto id = store.meta(key)) return store.get(*id);
    auto rec = make();
    store.set_meta(key, rec.id);
    return rec;
  }

  JobRecord rerun_with(const JobRecord& orig, const json& body) {
    json patch = body.value("args", json::object());
    if (!patch.is_object()) throw InvalidArgument("'args' must be an object");
    if (body.contains("overrides")) {
      const auto& ov = body.at("overrides");
      if (!ov.is_object()) throw InvalidArgument("'overrides' must be an object");
      patch["params"] = ov;
    }
    if (patch.contains("params") && orig.args.contains("params") && orig.tags.count("stage")) {
      json merged = orig.args.at("params");
      merged.merge_patch(patch.at("params"));
      stage_params(orig.tags.at("stage"), merged);
    }
    return store.rerun(orig.id, patch);
  }

  json dataset_summary(const DatasetRecord& d) {
    json out = d;
    json reviews = json::object();
    for (const auto& r : store.reviews(d.name)) reviews[std::to_string(r.at("section").get<std::int64_t>())] = r;
    json sections = json::array();
    const DatasetLayout layout(d.root);
    std::pair<std::int64_t, std::int64_t> expected{0, 0};
    try {
      expected = layout.load_config().section_dims();
    } catch (const Error&) {
    }
    for (auto s : layout.sections()) {
      json sec = {{"index", s}, {"montage", nullptr}, {"review", nullptr}};
      if (auto rep = read_json_file(layout.montage_report(s))) {
        sec["montage"] = {{"status", rep->value("status", "")},
                          {"canvas_width", rep->value("canvas_width", 0)},
                          {"canvas_height", rep->value("canvas_height", 0)},
                          {"expected_width", expected.first},
                          {"expected_height", expected.second}};
      }
      if (reviews.contains(std::to_string(s))) sec["review"] = reviews[std::to_string(s)];
      sections.push_back(sec);
    }
    out["sections"] = sections;
    return out;
  }

  void routes() {
    server.Get("/api/jobs", guard([this](const httplib::Request& req, httplib::Response& res) {
                 JobFilter f;
                 if (req.has_param("state") && !req.get_param_value("state").empty()) {
                   f.state = parse_state(req.get_param_value("state"));
                 }
                 if (req.has_param("app") && !req.get_param_value("app").empty()) f.app = req.get_param_value("app");
                 for (std::size_t i = 0; i < req.get_param_value_count("tag"); ++i) {
                   const auto tag = req.get_param_value("tag", i);
                   if (tag.empty()) continue;
                   const auto colon = tag.find(':');
                   if (colon == std::string::npos || colon == 0) {
                     throw InvalidArgument("tag filter must be key:value, got '" + tag + "'");
                   }
                   f.tags[tag.substr(0, colon)] = tag.substr(colon + 1);
                 }
                 json out = json::array();
                 for (const auto& r : store.list(f)) out.push_back(r);
                 send(res, 200, out);
               }));
    server.Get(R"(/api/jobs/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
                 send(res, 200, job_detail(store, req.matches[1]));
               }));
    server.Post(R"(/api/jobs/([^/]+)/rerun)", guard([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto orig = store.get(req.matches[1]);
                  const auto rec = once(body, "rerun." + orig.id, [&] { return rerun_with(orig, body); });
                  send(res, 201, rec);
                }));
    server.Post(R"(/api/jobs/([^/]+)/kill)", guard([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  store.kill(id, "killed via api");
                  send(res, 200, store.get(id));
                }));
    server.Get("/api/datasets", guard([this](const httplib::Request&, httplib::Response& res) {
                 json out = json::array();
                 for (const auto& d : store.datasets()) out.push_back(dataset_summary(d));
                 send(res, 200, out);
               }));
    server.Get(R"(/api/datasets/([^/]+)/previews/([^/]+)/(-?\d+))",
               guard([this](const httplib::Request& req, httplib::Response& res) {
                 const auto d = store.dataset(req.matches[1]);
                 const int scale = req.has_param("scale")
                                       ? static_cast<int>(parse_int(req.get_param_value("scale"), "scale"))
                                       : 1;
                 const auto p = dataset_preview(DatasetLayout(d.root), req.matches[2],
                                                parse_int(req.matches[3], "section"), scale);
                 const auto png = p.png();
                 res.status = 200;
                 res.set_header("X-Preview-Scale", std::to_string(p.scale));
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               }));
    server.Get(R"(/api/datasets/([^/]+)/seeds)", guard([this](const httplib::Request& req, httplib::Response& res) {
                 const DatasetLayout layout(store.dataset(req.matches[1]).root);
                 auto seeds = read_json_file(layout.seeds());
                 send(res, 200, seeds ? *seeds : segmenter::seeds_to_json({}));
               }));
    server.Post(R"(/api/datasets/([^/]+)/seeds)", guard([this](const httplib::Request& req, httplib::Response& res) {
                  const DatasetLayout layout(store.dataset(req.matches[1]).root);
                  json body = json::parse(req.body, nullptr, false);
                  if (body.is_discarded()) throw InvalidArgument("request body is not valid JSON");
                  if (body.is_array()) body = json{{"seeds", body}};
                  const auto seeds = segmenter::seeds_from_json(body);
                  const auto [w, h] = layout.load_config().section_dims();
                  const auto sections = static_cast<std::int64_t>(layout.sections().size());
                  segmenter::validate_seeds(seeds, {w, h, std::max<std::int64_t>(1, sections)});
                  const auto tmp = layout.seeds().string() + ".tmp";
                  std::ofstream(tmp) << segmenter::seeds_to_json(seeds).dump(2) << '\n';
                  fs::rename(tmp, layout.seeds());
                  auto out = segmenter::seeds_to_json(seeds);
                  out["count"] = seeds.size();
                  send(res, 200, out);
                }));
    server.Post(R"(/api/datasets/([^/]+)/review/(-?\d+))",
                guard([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string dataset = req.matches[1];
                  const auto section = parse_int(req.matches[2], "section");
                  store.dataset(dataset);
                  const auto body = parse_body(req);
                  const auto verdict = body.value("verdict", std::string());
                  if (verdict != "approve" && verdict != "reject") {
                    throw InvalidArgument("verdict must be 'approve' or 'reject'");
                  }
                  json out = {{"dataset", dataset}, {"section", section}, {"verdict", verdict}, {"job", nullptr}};
                  std::string job_id;
                  if (verdict == "reject") {
                    const auto overrides = body.value("overrides", json::object());
                    if (!overrides.is_object()) throw InvalidArgument("'overrides' must be an object");
                    const auto rec = once(body, "review." + dataset + "." + std::to_string(section), [&] {
                      JobFilter f;
                      f.app = "montage";
                      f.tags = {{"dataset", dataset}, {"section", std::to_string(section)}};
                      const auto prior = store.list(f);
                      if (prior.empty()) {
                        stage_params("montage", overrides);
                        return submit_montage(store, dataset, section, overrides);
                      }
                      return rerun_with(prior.back(), {{"overrides", overrides}});
                    });
                    job_id = rec.id;
                    out["job"] = rec;
                  }
                  store.put_review(dataset, static_cast<int>(section), verdict, job_id);
                  send(res, 200, out);
                }));
    server.Get("/api/launcher", guard([this](const httplib::Request&, httplib::Response& res) {
                 json status = nullptr;
                 if (auto s = store.meta(kLauncherStatusKey)) status = json::parse(*s, nullptr, false);
                 send(res, 200,
                      {{"paused", store.meta(kLauncherPausedKey).value_or("0") == "1"},
                       {"status", status},
                       {"counts", [&] {
                          json c = json::object();
                          for (const auto& [s, n] : store.counts()) c[state_name(s)] = n;
                          return c;
                        }()}});
               }));
    server.Post(R"(/api/launcher/(pause|resume))", guard([this](const httplib::Request& req, httplib::Response& res) {
                  const bool pause = req.matches[1] == "pause";
                  store.set_meta(kLauncherPausedKey, pause ? "1" : "0");
                  send(res, 200, {{"paused", pause}});
                }));
    server.Get(R"(/api/sweeps/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
                 send(res, 200, store.sweep(req.matches[1]));
               }));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send(res, res.status, {{"error", httplib::status_message(res.status)}});
    });
  }
};

ApiServer::ApiServer(ApiOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  const int n = std::max(1, impl_->options.threads);
  impl_->server.new_task_queue = [n] { return new httplib::ThreadPool(static_cast<std::size_t>(n)); };
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  if (impl_->port >= 0) return impl_->port;
  const auto& o = impl_->options;
  int port = -1;
  if (o.port == 0) {
    port = impl_->server.bind_to_any_port(o.host);
  } else if (impl_->server.bind_to_port(o.host, o.port)) {
    port = o.port;
  }
  if (port <= 0) throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
  impl_->port = port;
  return port;
}

void ApiServer::listen() {
  bind();
  spdlog::info("api: serving on {}:{}", impl_->options.host, impl_->port);
  impl_->server.listen_after_bind();
}

int ApiServer::start() {
  const int p = bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return p;
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ApiServer::port() const { return impl_->port; }

}  // namespace emflow::workflow
