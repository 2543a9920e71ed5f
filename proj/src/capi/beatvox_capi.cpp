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

#include "beatvox/beatvox.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "audio.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "features.hpp"
#include "live.hpp"
#include "midi.hpp"
#include "onset.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

struct bv_clip {
  beatvox::AudioClip clip;
};

struct bv_model {
  std::shared_ptr<const beatvox::UserModel> model;
};

struct bv_transcription {
  beatvox::Transcription t;
};

struct bv_report {
  beatvox::EvalReport report;
};

struct bv_live {
  std::shared_ptr<const beatvox::UserModel> model;
  beatvox::LiveTranscriber transcriber;
  beatvox::ChunkDecoder decoder;
  std::deque<beatvox::DrumEvent> pending;
};

namespace {

thread_local std::string g_last_error;

bv_status fail(bv_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

bv_status status_for(beatvox::ErrorKind kind) {
  using beatvox::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidArgument: return BV_ERR_INVALID_ARGUMENT;
    case ErrorKind::kIo: return BV_ERR_IO;
    case ErrorKind::kFormat: return BV_ERR_FORMAT;
    case ErrorKind::kVersion: return BV_ERR_VERSION;
    case ErrorKind::kOnsetCount: return BV_ERR_ONSET_COUNT;
    case ErrorKind::kState: return BV_ERR_STATE;
  }
  return BV_ERR_INTERNAL;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
bv_status guarded(Fn&& fn) {
  try {
    fn();
    return BV_OK;
  } catch (const beatvox::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BV_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

uint8_t* dup_bytes(const std::vector<std::uint8_t>& v) {
  auto* out = static_cast<uint8_t*>(std::malloc(std::max<std::size_t>(v.size(), 1)));
  if (!out) throw std::bad_alloc();
  if (!v.empty()) std::memcpy(out, v.data(), v.size());
  return out;
}

beatvox::OnsetParams to_core(const bv_onset_params* p) {
  beatvox::OnsetParams out;
  if (!p) return out;
  if (p->method != BV_ONSET_HFC && p->method != BV_ONSET_SPECTRAL_FLUX)
    throw beatvox::Error(beatvox::ErrorKind::kInvalidArgument, "unknown onset method");
  out.method = p->method == BV_ONSET_HFC ? beatvox::OnsetMethod::kHfc
                                         : beatvox::OnsetMethod::kSpectralFlux;
  out.threshold = p->threshold;
  out.min_ioi = p->min_ioi;
  out.silence_gate_db = p->silence_gate_db;
  out.validate();
  return out;
}

beatvox::FeatureConfig to_core(const bv_feature_config* c) {
  beatvox::FeatureConfig out;
  if (!c) return out;
  out.window_size = c->window_size;
  out.hop = c->hop;
  out.frames_per_event = c->frames_per_event;
  out.n_mels = c->n_mels;
  out.n_mfcc = c->n_mfcc;
  out.rolloff_fraction = c->rolloff_fraction;
  out.validate();
  return out;
}

beatvox::MidiMapping mapping_for(const bv_midi_options* o) {
  beatvox::MidiMapping m;
  if (o && o->mapping && *o->mapping) m = beatvox::parse_midi_mapping(o->mapping);
  if (o) m.note_duration = o->note_duration;
  m.validate();
  return m;
}

void require(bool ok, const char* what) {
  if (!ok) throw beatvox::Error(beatvox::ErrorKind::kInvalidArgument, what);
}

bv_event to_event(const beatvox::DrumEvent& e) { return {e.time, e.label.c_str(), e.velocity}; }

}  // namespace

extern "C" {

const char* bv_version(void) { return "1.0.0"; }

const char* bv_last_error(void) { return g_last_error.c_str(); }

const char* bv_status_name(bv_status status) {
  switch (status) {
    case BV_OK: return "ok";
    case BV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BV_ERR_IO: return "i/o error";
    case BV_ERR_FORMAT: return "format error";
    case BV_ERR_VERSION: return "unsupported version";
    case BV_ERR_ONSET_COUNT: return "onset count mismatch";
    case BV_ERR_STATE: return "invalid state";
    case BV_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

void bv_onset_params_default(bv_onset_params* out) {
  if (!out) return;
  const beatvox::OnsetParams d;
  out->method = BV_ONSET_HFC;
  out->threshold = d.threshold;
  out->min_ioi = d.min_ioi;
  out->silence_gate_db = d.silence_gate_db;
}

void bv_feature_config_default(bv_feature_config* out) {
  if (!out) return;
  const beatvox::FeatureConfig d;
  out->window_size = d.window_size;
  out->hop = d.hop;
  out->frames_per_event = d.frames_per_event;
  out->n_mels = d.n_mels;
  out->n_mfcc = d.n_mfcc;
  out->rolloff_fraction = d.rolloff_fraction;
}

void bv_midi_options_default(bv_midi_options* out) {
  if (!out) return;
  out->tempo_bpm = 120.0;
  out->ppq = 480;
  out->note_duration = beatvox::MidiMapping{}.note_duration;
  out->mapping = nullptr;
}

void bv_train_options_default(bv_train_options* out) {
  if (!out) return;
  out->class_spec = nullptr;
  out->k = 1;
  bv_onset_params_default(&out->onset);
  bv_feature_config_default(&out->features);
}

size_t bv_feature_count(void) { return beatvox::kFeatureCount; }

const char* bv_feature_name(size_t index) {
  if (index >= beatvox::kFeatureCount) return nullptr;
  return beatvox::feature_names()[index].c_str();
}

void bv_string_free(char* s) { std::free(s); }
void bv_bytes_free(uint8_t* bytes) { std::free(bytes); }

// ---- clips -----------------------------------------------------------------

bv_status bv_clip_load_wav(const char* path, bv_clip** out) {
  return guarded([&] {
    require(path && out, "path and out must not be null");
    *out = new bv_clip{beatvox::load_audio(path)};
  });
}

bv_status bv_clip_decode_wav(const uint8_t* bytes, size_t size, bv_clip** out) {
  return guarded([&] {
    require((bytes || size == 0) && out, "bytes and out must not be null");
    *out = new bv_clip{beatvox::decode_wav({bytes, size})};
  });
}

bv_status bv_clip_from_samples(const double* samples, size_t count, int sample_rate,
                               bv_clip** out) {
  return guarded([&] {
    require((samples || count == 0) && out, "samples and out must not be null");
    std::vector<double> v(samples, samples + count);
    if (sample_rate != beatvox::kCanonicalSampleRate && sample_rate > 0)
      v = beatvox::resample_linear(v, sample_rate, beatvox::kCanonicalSampleRate);
    else
      require(sample_rate > 0, "sample rate must be positive");
    *out = new bv_clip{beatvox::AudioClip(std::move(v), beatvox::kCanonicalSampleRate)};
  });
}

bv_status bv_clip_from_pcm16(const int16_t* pcm, size_t count, int sample_rate, bv_clip** out) {
  return guarded([&] {
    require((pcm || count == 0) && out, "pcm and out must not be null");
    const auto v = beatvox::pcm16_to_samples({pcm, count});
    const bv_status s = bv_clip_from_samples(v.data(), v.size(), sample_rate, out);
    if (s != BV_OK) throw beatvox::Error(beatvox::ErrorKind::kInvalidArgument, g_last_error);
  });
}

bv_status bv_clip_synth(const char* description, bv_clip** out) {
  return guarded([&] {
    require(description && out, "description and out must not be null");
    *out = new bv_clip{beatvox::synth_signal(beatvox::parse_synth_spec(description))};
  });
}

bv_status bv_clip_save_wav(const bv_clip* clip, const char* path) {
  return guarded([&] {
    require(clip && path, "clip and path must not be null");
    beatvox::save_wav(clip->clip, path);
  });
}

bv_status bv_clip_encode_wav(const bv_clip* clip, uint8_t** bytes, size_t* size) {
  return guarded([&] {
    require(clip && bytes && size, "arguments must not be null");
    const auto v = beatvox::encode_wav(clip->clip);
    *bytes = dup_bytes(v);
    *size = v.size();
  });
}

size_t bv_clip_length(const bv_clip* clip) { return clip ? clip->clip.size() : 0; }
int bv_clip_sample_rate(const bv_clip* clip) { return clip ? clip->clip.sample_rate() : 0; }
double bv_clip_duration(const bv_clip* clip) { return clip ? clip->clip.duration() : 0.0; }

size_t bv_clip_copy_samples(const bv_clip* clip, double* out, size_t capacity) {
  if (!clip || !out) return 0;
  const auto s = clip->clip.samples();
  const size_t n = std::min(capacity, s.size());
  std::copy_n(s.begin(), n, out);
  return n;
}

size_t bv_clip_true_onset_count(const bv_clip* clip) {
  return clip ? clip->clip.true_onsets().size() : 0;
}

double bv_clip_true_onset(const bv_clip* clip, size_t index) {
  if (!clip || index >= clip->clip.true_onsets().size()) return 0.0;
  return clip->clip.true_onsets()[index];
}

void bv_clip_free(bv_clip* clip) { delete clip; }

// ---- onsets and features -----------------------------------------------

bv_status bv_detect_onsets(const bv_clip* clip, const bv_onset_params* params,
                           const bv_feature_config* config, double* times, size_t capacity,
                           size_t* count) {
  return guarded([&] {
    require(clip && count && (times || capacity == 0), "arguments must not be null");
    const auto cfg = to_core(config);
    const auto onsets = beatvox::detect_onsets(clip->clip, to_core(params), cfg.window_size, cfg.hop);
    *count = onsets.size();
    for (size_t i = 0; i < std::min(capacity, onsets.size()); ++i) times[i] = onsets[i].time;
  });
}

bv_status bv_features_csv(const bv_clip* clip, const bv_onset_params* params,
                          const bv_feature_config* config, char** csv) {
  return guarded([&] {
    require(clip && csv, "clip and csv must not be null");
    const auto cfg = to_core(config);
    const auto onsets = beatvox::detect_onsets(clip->clip, to_core(params), cfg.window_size, cfg.hop);
    std::string out = "time";
    for (const auto& n : beatvox::feature_names()) out += "," + n;
    out += '\n';
    char buf[64];
    for (const auto& o : onsets) {
      const auto fv = beatvox::event_features(clip->clip, o, cfg);
      std::snprintf(buf, sizeof buf, "%.6f", o.time);
      out += buf;
      for (double v : fv.values) {
        std::snprintf(buf, sizeof buf, ",%.9g", v);
        out += buf;
      }
      out += '\n';
    }
    *csv = dup_string(out);
  });
}

// ---- models ----------------------------------------------------------------

bv_status bv_model_train(const bv_clip* clip, const bv_train_options* options, bv_model** out,
                         size_t* found, size_t* expected) {
  try {
    require(clip && options && options->class_spec && out, "arguments must not be null");
    const auto spec = beatvox::parse_class_spec(options->class_spec);
    auto model = beatvox::train_user_model(clip->clip, spec, to_core(&options->features),
                                           to_core(&options->onset), options->k);
    *out = new bv_model{std::make_shared<const beatvox::UserModel>(std::move(model))};
    if (found) *found = spec.total();
    if (expected) *expected = spec.total();
    return BV_OK;
  } catch (const beatvox::OnsetCountError& e) {
    if (found) *found = e.found();
    if (expected) *expected = e.expected();
    return fail(BV_ERR_ONSET_COUNT, e.what());
  } catch (...) {
    return guarded([] { throw; });
  }
}

bv_status bv_model_from_json(const char* document, size_t size, bv_model** out) {
  return guarded([&] {
    require(document && out, "document and out must not be null");
    *out = new bv_model{std::make_shared<const beatvox::UserModel>(
        beatvox::load_model(std::string_view(document, size)))};
  });
}

bv_status bv_model_load(const char* path, bv_model** out) {
  return guarded([&] {
    require(path && out, "path and out must not be null");
    *out = new bv_model{
        std::make_shared<const beatvox::UserModel>(beatvox::load_model_file(path))};
  });
}

bv_status bv_model_to_json(const bv_model* model, char** document) {
  return guarded([&] {
    require(model && document, "model and document must not be null");
    *document = dup_string(beatvox::save_model(*model->model));
  });
}

bv_status bv_model_save(const bv_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "model and path must not be null");
    beatvox::save_model_file(*model->model, path);
  });
}

double bv_model_training_accuracy(const bv_model* model) {
  return model ? model->model->training_accuracy : 0.0;
}

size_t bv_model_class_count(const bv_model* model) {
  return model ? model->model->class_names().size() : 0;
}

const char* bv_model_class_name(const bv_model* model, size_t index) {
  if (!model || index >= model->model->class_names().size()) return nullptr;
  return model->model->class_names()[index].c_str();
}

size_t bv_model_selected_count(const bv_model* model) {
  return model ? model->model->mask.size() : 0;
}

size_t bv_model_selected_feature(const bv_model* model, size_t index) {
  if (!model || index >= model->model->mask.size()) return static_cast<size_t>(-1);
  return model->model->mask[index];
}

size_t bv_model_k(const bv_model* model) { return model ? model->model->k : 0; }

void bv_model_free(bv_model* model) { delete model; }

// ---- transcriptions ------------------------------------------------------

bv_status bv_transcribe(const bv_model* model, const bv_clip* clip, bv_transcription** out) {
  return guarded([&] {
    require(model && clip && out, "arguments must not be null");
    *out = new bv_transcription{beatvox::transcribe(clip->clip, *model->model)};
  });
}

bv_status bv_transcription_from_events(const bv_event* events, size_t count, double duration,
                                       bv_transcription** out) {
  return guarded([&] {
    require((events || count == 0) && out, "arguments must not be null");
    beatvox::Transcription t;
    t.duration = duration;
    for (size_t i = 0; i < count; ++i) {
      require(events[i].label != nullptr, "event label must not be null");
      t.events.push_back({events[i].time, events[i].label, events[i].velocity});
    }
    std::stable_sort(t.events.begin(), t.events.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
    *out = new bv_transcription{std::move(t)};
  });
}

size_t bv_transcription_size(const bv_transcription* t) { return t ? t->t.events.size() : 0; }

bv_status bv_transcription_event(const bv_transcription* t, size_t index, bv_event* out) {
  return guarded([&] {
    require(t && out, "arguments must not be null");
    require(index < t->t.events.size(), "event index out of range");
    *out = to_event(t->t.events[index]);
  });
}

double bv_transcription_duration(const bv_transcription* t) { return t ? t->t.duration : 0.0; }

bv_status bv_transcription_to_smf(const bv_transcription* t, const bv_midi_options* options,
                                  uint8_t** bytes, size_t* size) {
  return guarded([&] {
    require(t && bytes && size, "arguments must not be null");
    bv_midi_options o;
    bv_midi_options_default(&o);
    if (options) o = *options;
    const auto smf = beatvox::write_smf(t->t, mapping_for(&o), o.tempo_bpm, o.ppq);
    *bytes = dup_bytes(smf);
    *size = smf.size();
  });
}

bv_status bv_transcription_from_smf(const uint8_t* bytes, size_t size,
                                    const bv_midi_options* options, bv_transcription** out) {
  return guarded([&] {
    require((bytes || size == 0) && out, "arguments must not be null");
    *out = new bv_transcription{beatvox::read_smf({bytes, size}, mapping_for(options))};
  });
}

bv_status bv_transcription_from_annotations(const char* text, size_t size,
                                            bv_transcription** out) {
  return guarded([&] {
    require((text || size == 0) && out, "arguments must not be null");
    beatvox::Transcription t;
    t.events = beatvox::parse_annotations(std::string_view(text ? text : "", size));
    t.duration = t.events.empty() ? 0.0 : t.events.back().time;
    *out = new bv_transcription{std::move(t)};
  });
}

bv_status bv_transcription_to_annotations(const bv_transcription* t, char** text) {
  return guarded([&] {
    require(t && text, "arguments must not be null");
    *text = dup_string(beatvox::format_annotations(t->t.events));
  });
}

bv_status bv_transcription_to_json(const bv_transcription* t, char** json) {
  return guarded([&] {
    require(t && json, "arguments must not be null");
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : t->t.events)
      arr.push_back({{"time", e.time}, {"label", e.label}, {"velocity", e.velocity}});
    *json = dup_string(arr.dump());
  });
}

void bv_transcription_free(bv_transcription* t) { delete t; }

// ---- evaluation ------------------------------------------------------------

bv_status bv_evaluate(const bv_transcription* pred, const bv_transcription* ref, double tolerance,
                      bv_report** out) {
  return guarded([&] {
    require(pred && ref && out, "arguments must not be null");
    *out = new bv_report{beatvox::evaluate(pred->t.events, ref->t.events, tolerance)};
  });
}

size_t bv_report_modify(const bv_report* r) { return r ? r->report.edits.modify : 0; }
size_t bv_report_add(const bv_report* r) { return r ? r->report.edits.add : 0; }
size_t bv_report_remove(const bv_report* r) { return r ? r->report.edits.remove : 0; }
size_t bv_report_class_count(const bv_report* r) { return r ? r->report.classes.size() : 0; }

const char* bv_report_class_name(const bv_report* r, size_t index) {
  if (!r || index >= r->report.classes.size()) return nullptr;
  return r->report.classes[index].label.c_str();
}

bv_status bv_report_class_scores(const bv_report* r, size_t index, double* precision,
                                 double* recall, double* f_measure) {
  return guarded([&] {
    require(r, "report must not be null");
    require(index < r->report.classes.size(), "class index out of range");
    const auto& c = r->report.classes[index];
    if (precision) *precision = c.precision;
    if (recall) *recall = c.recall;
    if (f_measure) *f_measure = c.f_measure;
  });
}

bv_status bv_report_render(const bv_report* r, bv_report_format format, char** text) {
  return guarded([&] {
    require(r && text, "arguments must not be null");
    require(format == BV_REPORT_TEXT || format == BV_REPORT_CSV, "unknown report format");
    *text = dup_string(beatvox::render_report(
        r->report, format == BV_REPORT_CSV ? beatvox::ReportFormat::kCsv : beatvox::ReportFormat::kText));
  });
}

void bv_report_free(bv_report* r) { delete r; }

// ---- live ------------------------------------------------------------------

bv_status bv_live_create(const bv_model* model, bv_live** out) {
  return guarded([&] {
    require(model && out, "model and out must not be null");
    *out = new bv_live{model->model, beatvox::LiveTranscriber(model->model), {}, {}};
  });
}

bv_status bv_live_push_pcm16(bv_live* live, const int16_t* pcm, size_t count) {
  return guarded([&] {
    require(live && (pcm || count == 0), "arguments must not be null");
    const auto samples = beatvox::pcm16_to_samples({pcm, count});
    for (auto& e : live->transcriber.push(samples)) live->pending.push_back(std::move(e));
  });
}

bv_status bv_live_push_bytes(bv_live* live, const uint8_t* bytes, size_t size) {
  return guarded([&] {
    require(live && (bytes || size == 0), "arguments must not be null");
    if (live->transcriber.finished())
      throw beatvox::Error(beatvox::ErrorKind::kState, "stream already finished");
    for (const auto& chunk : live->decoder.feed({bytes, size})) {
      const auto samples = beatvox::pcm16_to_samples(chunk.pcm);
      for (auto& e : live->transcriber.push(samples)) live->pending.push_back(std::move(e));
      if (chunk.final) {
        for (auto& e : live->transcriber.finish()) live->pending.push_back(std::move(e));
        break;
      }
    }
  });
}

bv_status bv_live_finish(bv_live* live) {
  return guarded([&] {
    require(live, "live must not be null");
    if (live->decoder.has_partial())
      throw beatvox::Error(beatvox::ErrorKind::kFormat, "stream ends inside a chunk");
    for (auto& e : live->transcriber.finish()) live->pending.push_back(std::move(e));
  });
}

int bv_live_finished(const bv_live* live) { return live && live->transcriber.finished() ? 1 : 0; }

size_t bv_live_pending(const bv_live* live) { return live ? live->pending.size() : 0; }

size_t bv_live_take(bv_live* live, bv_event* out, size_t capacity) {
  if (!live || !out) return 0;
  size_t n = 0;
  const auto& names = live->model->class_names();
  while (n < capacity && !live->pending.empty()) {
    const auto& e = live->pending.front();
    // Point at the model's copy of the label so it outlives the event.
    const auto it = std::find(names.begin(), names.end(), e.label);
    out[n++] = {e.time, it != names.end() ? it->c_str() : "", e.velocity};
    live->pending.pop_front();
  }
  return n;
}

void bv_live_free(bv_live* live) { delete live; }

}  // extern "C"
