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

#include "service.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "beatvox/beatvox.h"

namespace beatvox::service {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct ModelDeleter {
  void operator()(bv_model* m) const { bv_model_free(m); }
};
struct TranscriptionDeleter {
  void operator()(bv_transcription* t) const { bv_transcription_free(t); }
};
struct LiveDeleter {
  void operator()(bv_live* l) const { bv_live_free(l); }
};
struct ClipDeleter {
  void operator()(bv_clip* c) const { bv_clip_free(c); }
};

using ModelPtr = std::shared_ptr<const bv_model>;
using LivePtr = std::unique_ptr<bv_live, LiveDeleter>;

struct LiveEvent {
  double time;
  std::string label;
  int velocity;
};

struct Session {
  std::mutex mu;  // serialises this session's state transitions
  ModelPtr model;
  std::shared_ptr<const bv_transcription> latest;
  LivePtr live;
  std::vector<LiveEvent> live_events;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

int http_status(bv_status s) {
  switch (s) {
    case BV_ERR_INVALID_ARGUMENT:
    case BV_ERR_FORMAT:
    case BV_ERR_VERSION:
      return 400;
    case BV_ERR_ONSET_COUNT:
    case BV_ERR_STATE:
      return 409;
    default:
      return 500;
  }
}

json events_json(const std::vector<LiveEvent>& events) {
  json arr = json::array();
  for (const auto& e : events) arr.push_back({{"time", e.time}, {"label", e.label}, {"velocity", e.velocity}});
  return arr;
}

std::vector<LiveEvent> events_of(const bv_transcription* t) {
  std::vector<LiveEvent> out;
  for (size_t i = 0; i < bv_transcription_size(t); ++i) {
    bv_event e;
    if (bv_transcription_event(t, i, &e) == BV_OK) out.push_back({e.time, e.label, e.velocity});
  }
  return out;
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

// Audio payload: multipart field "audio" or the raw body.
const std::string* audio_payload(const httplib::Request& req) {
  if (req.is_multipart_form_data()) {
    auto it = req.files.find("audio");
    return it == req.files.end() ? nullptr : &it->second.content;
  }
  return req.body.empty() ? nullptr : &req.body;
}

std::string form_value(const httplib::Request& req, const std::string& key) {
  if (auto it = req.files.find(key); it != req.files.end()) return it->second.content;
  if (req.has_param(key)) return req.get_param_value(key);
  return {};
}

}  // namespace

struct Service::Impl {
  Options options;
  mutable std::mutex mu;  // guards the registry only
  std::map<std::string, std::shared_ptr<Session>> sessions;

  explicit Impl(Options o) : options(std::move(o)) {
    if (options.data_dir.empty()) return;
    fs::create_directories(options.data_dir);
    for (const auto& entry : fs::directory_iterator(options.data_dir)) {
      if (entry.path().extension() != ".json") continue;
      bv_model* m = nullptr;
      if (bv_model_load(entry.path().string().c_str(), &m) != BV_OK) {
        std::fprintf(stderr, "skipping %s: %s\n", entry.path().string().c_str(), bv_last_error());
        continue;
      }
      auto s = std::make_shared<Session>();
      s->model = ModelPtr(m, ModelDeleter{});
      sessions[entry.path().stem().string()] = std::move(s);
    }
  }

  std::shared_ptr<Session> find(const httplib::Request& req) const {
    std::lock_guard lock(mu);
    auto it = sessions.find(req.path_params.at("id"));
    return it == sessions.end() ? nullptr : it->second;
  }

  void persist(const std::string& id, const bv_model* model) const {
    if (options.data_dir.empty()) return;
    const fs::path final_path = fs::path(options.data_dir) / (id + ".json");
    const fs::path tmp = final_path.string() + ".tmp";
    if (bv_model_save(model, tmp.string().c_str()) != BV_OK) {
      std::fprintf(stderr, "cannot persist model %s: %s\n", id.c_str(), bv_last_error());
      return;
    }
    fs::rename(tmp, final_path);
  }

  void create(const httplib::Request&, httplib::Response& res) {
    const std::string id = random_id();
    {
      std::lock_guard lock(mu);
      sessions[id] = std::make_shared<Session>();
    }
    send_json(res, 201, {{"id", id}, {"state", "empty"}});
  }

  void train(const httplib::Request& req, httplib::Response& res) {
    auto s = find(req);
    if (!s) return send_error(res, 404, "unknown session");
    const std::string* audio = audio_payload(req);
    const std::string classes = form_value(req, "classes");
    if (!audio || !req.is_multipart_form_data())
      return send_error(res, 400, "expected multipart form with an 'audio' part");
    if (classes.empty()) return send_error(res, 400, "missing 'classes'");

    bv_train_options opts;
    bv_train_options_default(&opts);
    opts.class_spec = classes.c_str();
    if (const std::string k = form_value(req, "k"); !k.empty()) {
      char* end = nullptr;
      const long v = std::strtol(k.c_str(), &end, 10);
      if (*end != '\0' || v < 1) return send_error(res, 400, "k must be a positive integer");
      opts.k = static_cast<size_t>(v);
    }

    bv_clip* raw_clip = nullptr;
    bv_status st = bv_clip_decode_wav(reinterpret_cast<const uint8_t*>(audio->data()),
                                      audio->size(), &raw_clip);
    if (st != BV_OK) return send_error(res, 400, bv_last_error());
    std::unique_ptr<bv_clip, ClipDeleter> clip(raw_clip);

    std::lock_guard lock(s->mu);
    bv_model* m = nullptr;
    size_t found = 0, expected = 0;
    st = bv_model_train(clip.get(), &opts, &m, &found, &expected);
    if (st == BV_ERR_ONSET_COUNT)
      return send_json(res, 409, {{"error", bv_last_error()}, {"found", found}, {"expected", expected}});
    if (st != BV_OK) return send_error(res, http_status(st), bv_last_error());

    ModelPtr model(m, ModelDeleter{});
    json selected = json::array();
    for (size_t i = 0; i < bv_model_selected_count(m); ++i)
      selected.push_back(bv_feature_name(bv_model_selected_feature(m, i)));
    persist(req.path_params.at("id"), m);
    s->model = std::move(model);  // swapped whole; readers keep their own reference
    s->latest.reset();
    send_json(res, 200,
              {{"onsets_found", found},
               {"expected", expected},
               {"selected_features", selected},
               {"training_accuracy", bv_model_training_accuracy(m)}});
  }

  void transcribe(const httplib::Request& req, httplib::Response& res) {
    auto s = find(req);
    if (!s) return send_error(res, 404, "unknown session");
    std::lock_guard lock(s->mu);
    if (!s->model) return send_error(res, 409, "session is not trained");
    const std::string* audio = audio_payload(req);
    if (!audio) return send_error(res, 400, "missing WAV payload");
    bv_clip* raw_clip = nullptr;
    bv_status st = bv_clip_decode_wav(reinterpret_cast<const uint8_t*>(audio->data()),
                                      audio->size(), &raw_clip);
    if (st != BV_OK) return send_error(res, 400, bv_last_error());
    std::unique_ptr<bv_clip, ClipDeleter> clip(raw_clip);
    bv_transcription* t = nullptr;
    st = bv_transcribe(s->model.get(), clip.get(), &t);
    if (st != BV_OK) return send_error(res, http_status(st), bv_last_error());
    s->latest = std::shared_ptr<const bv_transcription>(t, TranscriptionDeleter{});
    send_json(res, 200, {{"events", events_json(events_of(t))}, {"duration", bv_transcription_duration(t)}});
  }

  void midi(const httplib::Request& req, httplib::Response& res) {
    auto s = find(req);
    if (!s) return send_error(res, 404, "unknown session");
    std::shared_ptr<const bv_transcription> latest;
    {
      std::lock_guard lock(s->mu);
      if (!s->model) return send_error(res, 409, "session is not trained");
      latest = s->latest;
    }
    if (!latest) return send_error(res, 409, "no transcription yet");
    bv_midi_options opts;
    bv_midi_options_default(&opts);
    if (req.has_param("tempo")) {
      char* end = nullptr;
      const std::string v = req.get_param_value("tempo");
      opts.tempo_bpm = std::strtod(v.c_str(), &end);
      if (v.empty() || *end != '\0') return send_error(res, 400, "tempo must be a number");
    }
    uint8_t* bytes = nullptr;
    size_t size = 0;
    const bv_status st = bv_transcription_to_smf(latest.get(), &opts, &bytes, &size);
    if (st != BV_OK) return send_error(res, http_status(st), bv_last_error());
    res.status = 200;
    res.set_content(reinterpret_cast<const char*>(bytes), size, "audio/midi");
    res.set_header("Content-Disposition", "attachment; filename=\"transcription.mid\"");
    bv_bytes_free(bytes);
  }

  void model(const httplib::Request& req, httplib::Response& res) {
    auto s = find(req);
    if (!s) return send_error(res, 404, "unknown session");
    ModelPtr model;
    {
      std::lock_guard lock(s->mu);
      model = s->model;
    }
    if (!model) return send_error(res, 409, "session is not trained");
    char* doc = nullptr;
    const bv_status st = bv_model_to_json(model.get(), &doc);
    if (st != BV_OK) return send_error(res, http_status(st), bv_last_error());
    res.status = 200;
    res.set_content(doc, "application/json");
    bv_string_free(doc);
  }

  // Chunks are decoded as the body arrives; every event whose analysis span
  // is complete is returned in the response to the request that completed it.
  void live(const httplib::Request& req, httplib::Response& res,
            const httplib::ContentReader& reader) {
    auto s = find(req);
    if (!s) return send_error(res, 404, "unknown session");
    std::lock_guard lock(s->mu);
    if (!s->model) return send_error(res, 409, "session is not trained");
    if (!s->live || bv_live_finished(s->live.get())) {
      bv_live* l = nullptr;
      if (bv_live_create(s->model.get(), &l) != BV_OK) return send_error(res, 500, bv_last_error());
      s->live.reset(l);
      s->live_events.clear();
    }
    bv_live* live = s->live.get();
    std::vector<LiveEvent> emitted;
    bv_status st = BV_OK;
    std::string message;
    auto drain = [&] {
      std::vector<bv_event> buf(bv_live_pending(live));
      buf.resize(bv_live_take(live, buf.data(), buf.size()));
      for (const auto& e : buf) emitted.push_back({e.time, e.label, e.velocity});
    };
    reader([&](const char* data, size_t len) {
      if (st != BV_OK) return true;  // discard the rest of a rejected body
      st = bv_live_push_bytes(live, reinterpret_cast<const uint8_t*>(data), len);
      if (st != BV_OK) message = bv_last_error();
      drain();
      return true;
    });
    if (st != BV_OK) {
      s->live.reset();
      s->live_events.clear();
      return send_error(res, http_status(st), message);
    }
    s->live_events.insert(s->live_events.end(), emitted.begin(), emitted.end());
    const bool finished = bv_live_finished(live) != 0;
    if (finished) {
      std::vector<bv_event> all;
      for (const auto& e : s->live_events) all.push_back({e.time, e.label.c_str(), e.velocity});
      bv_transcription* t = nullptr;
      const double duration = all.empty() ? 0.0 : all.back().time;
      if (bv_transcription_from_events(all.data(), all.size(), duration, &t) == BV_OK)
        s->latest = std::shared_ptr<const bv_transcription>(t, TranscriptionDeleter{});
    }
    send_json(res, 200, {{"events", events_json(emitted)}, {"finished", finished}});
  }

  void drop_live(const httplib::Request& req, httplib::Response& res) {
    auto s = find(req);
    if (!s) return send_error(res, 404, "unknown session");
    std::lock_guard lock(s->mu);
    s->live.reset();
    s->live_events.clear();
    res.status = 204;
  }
};

Service::Service(Options options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() = default;

std::size_t Service::session_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->sessions.size();
}

void Service::mount(httplib::Server& server) {
  Impl* impl = impl_.get();
  server.Post("/api/sessions",
              [impl](const httplib::Request& q, httplib::Response& r) { impl->create(q, r); });
  server.Post("/api/sessions/:id/train",
              [impl](const httplib::Request& q, httplib::Response& r) { impl->train(q, r); });
  server.Post("/api/sessions/:id/transcribe",
              [impl](const httplib::Request& q, httplib::Response& r) { impl->transcribe(q, r); });
  server.Get("/api/sessions/:id/midi",
             [impl](const httplib::Request& q, httplib::Response& r) { impl->midi(q, r); });
  server.Get("/api/sessions/:id/model",
             [impl](const httplib::Request& q, httplib::Response& r) { impl->model(q, r); });
  server.Post("/api/sessions/:id/live",
              [impl](const httplib::Request& q, httplib::Response& r,
                     const httplib::ContentReader& reader) { impl->live(q, r, reader); });
  server.Delete("/api/sessions/:id/live",
                [impl](const httplib::Request& q, httplib::Response& r) { impl->drop_live(q, r); });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& r, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(r, 500, e.what());
    } catch (...) {
      send_error(r, 500, "unknown error");
    }
  });
}

int default_port() {
  if (const char* v = std::getenv(kPortEnv); v && *v) {
    char* end = nullptr;
    const long p = std::strtol(v, &end, 10);
    if (*end == '\0' && p > 0 && p < 65536) return static_cast<int>(p);
  }
  return kDefaultPort;
}

bool serve(const std::string& host, int port, const Options& options) {
  Service service(options);
  httplib::Server server;
  service.mount(server);
  std::fprintf(stderr, "beatvox: listening on %s:%d\n", host.c_str(), port);
  return server.listen(host, port);
}

}  // namespace beatvox::service
