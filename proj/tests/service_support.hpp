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

// Loopback server harness and wire helpers shared by the service tests and
// the acceptance binary. Talks to the engine through the C API only.

#ifndef BEATVOX_TESTS_SERVICE_SUPPORT_HPP_
#define BEATVOX_TESTS_SERVICE_SUPPORT_HPP_

#include <beatvox/beatvox.h>
#include <httplib.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "service.hpp"
#include "test_support.hpp"

namespace beatvox::testing {

class ServiceHarness {
 public:
  explicit ServiceHarness(beatvox::service::Options options = {}) : service(std::move(options)) {
    service.mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    if (port <= 0) throw std::runtime_error("cannot bind loopback port");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~ServiceHarness() {
    server.stop();
    thread.join();
  }
  ServiceHarness(const ServiceHarness&) = delete;
  ServiceHarness& operator=(const ServiceHarness&) = delete;

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }

  beatvox::service::Service service;
  httplib::Server server;
  int port = 0;
  std::thread thread;
};

inline std::string wav_bytes(const SynthSpec& spec) {
  bv_clip* clip = nullptr;
  if (bv_clip_synth(synth_text(spec).c_str(), &clip) != BV_OK) throw std::runtime_error(bv_last_error());
  std::uint8_t* bytes = nullptr;
  size_t size = 0;
  const bv_status st = bv_clip_encode_wav(clip, &bytes, &size);
  bv_clip_free(clip);
  if (st != BV_OK) throw std::runtime_error(bv_last_error());
  std::string out(reinterpret_cast<const char*>(bytes), size);
  bv_bytes_free(bytes);
  return out;
}

// Exact 16-bit samples carried by a 16-bit WAV.
inline std::vector<std::int16_t> pcm_of_wav(const std::string& wav) {
  bv_clip* clip = nullptr;
  if (bv_clip_decode_wav(reinterpret_cast<const std::uint8_t*>(wav.data()), wav.size(), &clip) != BV_OK)
    throw std::runtime_error(bv_last_error());
  std::vector<double> x(bv_clip_length(clip));
  bv_clip_copy_samples(clip, x.data(), x.size());
  bv_clip_free(clip);
  std::vector<std::int16_t> pcm;
  pcm.reserve(x.size());
  for (double v : x) pcm.push_back(static_cast<std::int16_t>(std::lround(v * 32768.0)));
  return pcm;
}

// Wire encoding: big-endian seq and byte length, final flag, little-endian PCM.
inline std::string wire_stream(const std::vector<std::int16_t>& pcm, std::size_t samples_per_chunk) {
  std::string out;
  std::uint32_t seq = 0;
  for (std::size_t pos = 0; pos < pcm.size() || seq == 0; pos += samples_per_chunk, ++seq) {
    const std::size_t n = std::min(samples_per_chunk, pcm.size() - std::min(pos, pcm.size()));
    const bool final = pos + n >= pcm.size();
    const std::uint32_t len = static_cast<std::uint32_t>(n * 2);
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>(seq >> s));
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>(len >> s));
    out.push_back(final ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::uint16_t>(pcm[pos + i]);
      out.push_back(static_cast<char>(u & 0xFF));
      out.push_back(static_cast<char>(u >> 8));
    }
    if (final) break;
  }
  return out;
}

inline httplib::Result train_session(httplib::Client& cli, const std::string& id, const std::string& wav,
                                     const std::string& classes, const std::string& k = {}) {
  httplib::MultipartFormDataItems form = {{"audio", wav, "train.wav", "audio/wav"},
                                          {"classes", classes, "", ""}};
  if (!k.empty()) form.push_back({"k", k, "", ""});
  return cli.Post("/api/sessions/" + id + "/train", form);
}

}  // namespace beatvox::testing

#endif  // BEATVOX_TESTS_SERVICE_SUPPORT_HPP_
