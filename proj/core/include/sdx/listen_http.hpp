// Copyright 2026 The sdxkit Authors
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
#include <optional>
#include <string>

#include "sdx/error.hpp"
#include "sdx/listen.hpp"

namespace sdx {

// JSON API over a ListeningTest:
//   POST /sessions            {assessor, category, equipment?} -> session
//   GET  /sessions/:id/next   -> comparison payload (no model ids)
//   GET  /audio/:clip_id      -> audio/wav
//   POST /results             {comparison_id, choice, elapsed_seconds, switch_count}
//   GET  /standings           -> ratings snapshot
//   GET  /stats               -> assessor statistics
// Errors are {"error": <code>, "message": ...} with 400/404/409/410.
class ListenServer {
 public:
  explicit ListenServer(ListeningTest& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~ListenServer();
  ListenServer(const ListenServer&) = delete;
  ListenServer& operator=(const ListenServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Maps an error code to an HTTP status.
int http_status(Errc code);

}  // namespace sdx
