/*
  Copyright 2026 The beatvox Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

/*
  beatvox C API.

  User-trainable vocal percussion transcription: enrol a model from a clip of
  N exemplars per drum class, transcribe performances into drum events,
  render/read Standard MIDI Files and score transcriptions against
  annotations.

  Conventions:
    - Every fallible call returns a bv_status; BV_OK is zero.
    - On failure bv_last_error() returns a message for the calling thread,
      valid until the next failing call on that thread.
    - Handles are opaque and owned by the caller; release each with its
      matching *_free function. Passing NULL to a *_free function is a no-op.
    - Strings and byte buffers returned through out-parameters are owned by
      the caller and released with bv_string_free / bv_bytes_free.
    - Models are immutable once created and may be shared between threads.
*/

#ifndef BEATVOX_BEATVOX_H_
#define BEATVOX_BEATVOX_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BEATVOX_BUILDING_LIBRARY)
#    define BV_API __declspec(dllexport)
#  else
#    define BV_API __declspec(dllimport)
#  endif
#else
#  define BV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bv_status {
  BV_OK = 0,
  BV_ERR_INVALID_ARGUMENT = 1,
  BV_ERR_IO = 2,
  BV_ERR_FORMAT = 3,
  BV_ERR_VERSION = 4,
  BV_ERR_ONSET_COUNT = 5,
  BV_ERR_STATE = 6,
  BV_ERR_INTERNAL = 99
} bv_status;

typedef struct bv_clip bv_clip;
typedef struct bv_model bv_model;
typedef struct bv_transcription bv_transcription;
typedef struct bv_report bv_report;
typedef struct bv_live bv_live;

typedef enum bv_onset_method { BV_ONSET_HFC = 0, BV_ONSET_SPECTRAL_FLUX = 1 } bv_onset_method;

typedef struct bv_onset_params {
  bv_onset_method method;
  double threshold;       /* multiplier on the local median, > 0 */
  double min_ioi;         /* seconds */
  double silence_gate_db; /* dBFS */
} bv_onset_params;

typedef struct bv_feature_config {
  size_t window_size;
  size_t hop;
  size_t frames_per_event;
  size_t n_mels;
  size_t n_mfcc;
  double rolloff_fraction;
} bv_feature_config;

typedef struct bv_event {
  double time;       /* seconds */
  const char* label; /* owned by the producing handle */
  int velocity;      /* 1..127 */
} bv_event;

typedef struct bv_midi_options {
  double tempo_bpm;      /* default 120 */
  int ppq;               /* default 480 */
  double note_duration;  /* seconds, default 0.1 */
  const char* mapping;   /* "name:note,..." over kick:36,snare:38,hihat:42; NULL = defaults */
} bv_midi_options;

BV_API const char* bv_version(void);
BV_API const char* bv_last_error(void);
BV_API const char* bv_status_name(bv_status status);

BV_API void bv_onset_params_default(bv_onset_params* out);
BV_API void bv_feature_config_default(bv_feature_config* out);
BV_API void bv_midi_options_default(bv_midi_options* out);

/* Canonical feature names, index in [0, 20). NULL when out of range. */
BV_API size_t bv_feature_count(void);
BV_API const char* bv_feature_name(size_t index);

BV_API void bv_string_free(char* s);
BV_API void bv_bytes_free(uint8_t* bytes);

/* ---- audio clips ------------------------------------------------------- */

/* Decodes a WAV file; stereo is downmixed and audio resampled to 44100 Hz. */
BV_API bv_status bv_clip_load_wav(const char* path, bv_clip** out);
BV_API bv_status bv_clip_decode_wav(const uint8_t* bytes, size_t size, bv_clip** out);
BV_API bv_status bv_clip_from_samples(const double* samples, size_t count, int sample_rate,
                                      bv_clip** out);
BV_API bv_status bv_clip_from_pcm16(const int16_t* pcm, size_t count, int sample_rate,
                                    bv_clip** out);
/* Builds a test signal from its text description (see the README). */
BV_API bv_status bv_clip_synth(const char* description, bv_clip** out);
BV_API bv_status bv_clip_save_wav(const bv_clip* clip, const char* path);
BV_API bv_status bv_clip_encode_wav(const bv_clip* clip, uint8_t** bytes, size_t* size);
BV_API size_t bv_clip_length(const bv_clip* clip);
BV_API int bv_clip_sample_rate(const bv_clip* clip);
BV_API double bv_clip_duration(const bv_clip* clip);
/* Copies up to `capacity` samples; returns the number copied. */
BV_API size_t bv_clip_copy_samples(const bv_clip* clip, double* out, size_t capacity);
/* Ground-truth onset times of a synthesized clip (0 for loaded audio). */
BV_API size_t bv_clip_true_onset_count(const bv_clip* clip);
BV_API double bv_clip_true_onset(const bv_clip* clip, size_t index);
BV_API void bv_clip_free(bv_clip* clip);

/* ---- onsets and features ----------------------------------------------- */

/* Writes up to `capacity` onset times; *count receives the total found. */
BV_API bv_status bv_detect_onsets(const bv_clip* clip, const bv_onset_params* params,
                                  const bv_feature_config* config, double* times,
                                  size_t capacity, size_t* count);
/* CSV with a header of "time" plus the canonical feature names. */
BV_API bv_status bv_features_csv(const bv_clip* clip, const bv_onset_params* params,
                                 const bv_feature_config* config, char** csv);

/* ---- models ------------------------------------------------------------ */

typedef struct bv_train_options {
  const char* class_spec; /* "kick:5,snare:5,hihat:5" */
  size_t k;               /* neighbours, default 1 */
  bv_onset_params onset;
  bv_feature_config features;
} bv_train_options;

BV_API void bv_train_options_default(bv_train_options* out);

/* *found and *expected receive the detected and required onset counts; on
   BV_ERR_ONSET_COUNT they describe the mismatch. Either pointer may be NULL. */
BV_API bv_status bv_model_train(const bv_clip* clip, const bv_train_options* options,
                                bv_model** out, size_t* found, size_t* expected);
BV_API bv_status bv_model_from_json(const char* document, size_t size, bv_model** out);
BV_API bv_status bv_model_load(const char* path, bv_model** out);
BV_API bv_status bv_model_to_json(const bv_model* model, char** document);
BV_API bv_status bv_model_save(const bv_model* model, const char* path);
BV_API double bv_model_training_accuracy(const bv_model* model);
BV_API size_t bv_model_class_count(const bv_model* model);
BV_API const char* bv_model_class_name(const bv_model* model, size_t index);
BV_API size_t bv_model_selected_count(const bv_model* model);
BV_API size_t bv_model_selected_feature(const bv_model* model, size_t index);
BV_API size_t bv_model_k(const bv_model* model);
BV_API void bv_model_free(bv_model* model);

/* ---- transcriptions ---------------------------------------------------- */

BV_API bv_status bv_transcribe(const bv_model* model, const bv_clip* clip,
                               bv_transcription** out);
/* Builds a transcription from events; labels are copied. */
BV_API bv_status bv_transcription_from_events(const bv_event* events, size_t count,
                                              double duration, bv_transcription** out);
BV_API size_t bv_transcription_size(const bv_transcription* t);
BV_API bv_status bv_transcription_event(const bv_transcription* t, size_t index,
                                        bv_event* out);
BV_API double bv_transcription_duration(const bv_transcription* t);
BV_API bv_status bv_transcription_to_smf(const bv_transcription* t,
                                         const bv_midi_options* options, uint8_t** bytes,
                                         size_t* size);
BV_API bv_status bv_transcription_from_smf(const uint8_t* bytes, size_t size,
                                           const bv_midi_options* options,
                                           bv_transcription** out);
/* Annotation text: one "time,label" per line. */
BV_API bv_status bv_transcription_from_annotations(const char* text, size_t size,
                                                   bv_transcription** out);
BV_API bv_status bv_transcription_to_annotations(const bv_transcription* t, char** text);
/* JSON array of {"time","label","velocity"} objects. */
BV_API bv_status bv_transcription_to_json(const bv_transcription* t, char** json);
BV_API void bv_transcription_free(bv_transcription* t);

/* ---- evaluation -------------------------------------------------------- */

typedef enum bv_report_format { BV_REPORT_TEXT = 0, BV_REPORT_CSV = 1 } bv_report_format;

BV_API bv_status bv_evaluate(const bv_transcription* pred, const bv_transcription* ref,
                             double tolerance, bv_report** out);
BV_API size_t bv_report_modify(const bv_report* r);
BV_API size_t bv_report_add(const bv_report* r);
BV_API size_t bv_report_remove(const bv_report* r);
BV_API size_t bv_report_class_count(const bv_report* r);
BV_API const char* bv_report_class_name(const bv_report* r, size_t index);
/* Precision, recall and F-measure of one class; any pointer may be NULL. */
BV_API bv_status bv_report_class_scores(const bv_report* r, size_t index, double* precision,
                                        double* recall, double* f_measure);
BV_API bv_status bv_report_render(const bv_report* r, bv_report_format format, char** text);
BV_API void bv_report_free(bv_report* r);

/* ---- live streaming ---------------------------------------------------- */

/* The live handle keeps its own reference to the model. */
BV_API bv_status bv_live_create(const bv_model* model, bv_live** out);
BV_API bv_status bv_live_push_pcm16(bv_live* live, const int16_t* pcm, size_t count);
/* Feeds wire-format stream chunks (9-byte big-endian header: sequence,
   payload length, final flag; then 16-bit LE PCM). A chunk may be split
   across calls. A final chunk closes the stream. */
BV_API bv_status bv_live_push_bytes(bv_live* live, const uint8_t* bytes, size_t size);
BV_API bv_status bv_live_finish(bv_live* live);
BV_API int bv_live_finished(const bv_live* live);
/* Number of events emitted and not yet taken. */
BV_API size_t bv_live_pending(const bv_live* live);
/* Moves up to `capacity` events into `out`; returns the number moved. Label
   pointers stay valid for the lifetime of the live handle. */
BV_API size_t bv_live_take(bv_live* live, bv_event* out, size_t capacity);
BV_API void bv_live_free(bv_live* live);

#ifdef __cplusplus
}
#endif

#endif /* BEATVOX_BEATVOX_H_ */
