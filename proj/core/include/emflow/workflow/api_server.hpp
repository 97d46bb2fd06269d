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

#include <filesystem>
#include <memory>
#include <string>

namespace emflow::workflow {

struct ApiOptions {
  std::filesystem::path store_path;
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  int threads = 4;
};

/// HTTP+JSON service over a job store for the operator console.
///
///   GET  /api/jobs?state=&tag=k:v&app=        job list (tag may repeat)
///   GET  /api/jobs/{id}                       record, transition log, output tail
///   POST /api/jobs/{id}/rerun                 {overrides, args, token}
///   POST /api/jobs/{id}/kill
///   GET  /api/datasets                        records with per-section status
///   GET  /api/datasets/{d}/previews/{stage}/{section}?scale=   PNG
///   GET  /api/datasets/{d}/seeds
///   POST /api/datasets/{d}/seeds              SeedList JSON
///   POST /api/datasets/{d}/review/{section}   {verdict, overrides, token}
///   GET  /api/launcher
///   POST /api/launcher/pause, /api/launcher/resume
///   GET  /api/sweeps/{id}
///
/// Errors come back as {"error": message} with 400 (invalid argument),
/// 404 (not found), 409 (conflict) or 500.
class ApiServer {
 public:
  explicit ApiServer(ApiOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the socket and returns the port. Throws Error on failure.
  int bind();
  /// Serves until stop(); binds first if needed.
  void listen();
  /// bind() plus listen() on a background thread.
  int start();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace emflow::workflow
