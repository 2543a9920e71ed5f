// Copyright 2026 The beatvox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BEATVOX_TOOLS_SERVICE_HPP_
#define BEATVOX_TOOLS_SERVICE_HPP_

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace beatvox::service {

inline constexpr const char* kPortEnv = "BEATVOX_PORT";
inline constexpr int kDefaultPort = 8080;

struct Options {
  std::string data_dir;  // empty = in-memory only
};

// Session registry plus the HTTP routes over it.
//
//   POST /api/sessions                       -> {"id"}
//   POST /api/sessions/{id}/train            multipart: audio (WAV), classes[, k]
//   POST /api/sessions/{id}/transcribe       WAV body or multipart "audio"
//   GET  /api/sessions/{id}/midi?tempo=BPM   SMF of the latest transcription
//   GET  /api/sessions/{id}/model            model document
//   POST /api/sessions/{id}/live             binary stream chunks -> events
//   DELETE /api/sessions/{id}/live           drop an unfinished stream
class Service {
 public:
  explicit Service(Options options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);
  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Port from the environment, falling back to kDefaultPort.
int default_port();

// Blocks until the server stops. Returns false when the port cannot be bound.
bool serve(const std::string& host, int port, const Options& options);

}  // namespace beatvox::service

#endif  // BEATVOX_TOOLS_SERVICE_HPP_
