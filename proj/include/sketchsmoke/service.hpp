// Copyright 2026 The SketchSmoke Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP session API for sketch-guided smoke.
//
//   POST   /sessions                   {params, strokes} -> 201 {id, psi_stats, fit_report}
//   POST   /sessions/{id}/steps        {count} -> {frames_added, cfl_max}
//   PUT    /sessions/{id}/strokes      {strokes} -> {fit_report}
//   GET    /sessions/{id}/frames/{n}   -> image/png
//   GET    /sessions/{id}/field?kind=velocity|psi|target -> SFLD bytes
//   DELETE /sessions/{id}
//   GET    /health                     -> {"status":"ok"}

#ifndef SKETCHSMOKE_SERVICE_HPP_
#define SKETCHSMOKE_SERVICE_HPP_

#include <chrono>
#include <memory>
#include <string>

#include "sketchsmoke/reconstruct.hpp"

namespace sks {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int max_sessions = 64;
  std::chrono::seconds idle_timeout{600};
  ExternalGenerators generators;
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  int session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sks

#endif  // SKETCHSMOKE_SERVICE_HPP_
