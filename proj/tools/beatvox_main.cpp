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

// beatvox command line: train, transcribe, eval, features, synth, serve.
// Exit codes: 0 success, 1 usage or I/O error, 2 onset-count mismatch.

#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beatvox/beatvox.h"
#include "service.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitOnsetCount = 2;

struct Failure {
  int code;
  std::string message;
};

void check(bv_status st, const std::string& context) {
  if (st == BV_OK) return;
  throw Failure{st == BV_ERR_ONSET_COUNT ? kExitOnsetCount : kExitError,
                context.empty() ? bv_last_error() : context + ": " + bv_last_error()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitError, "cannot open " + path};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const void* data, size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size)))
    throw Failure{kExitError, "cannot write " + path};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Clip = std::unique_ptr<bv_clip, Deleter<bv_clip, bv_clip_free>>;
using Model = std::unique_ptr<bv_model, Deleter<bv_model, bv_model_free>>;
using Transcription =
    std::unique_ptr<bv_transcription, Deleter<bv_transcription, bv_transcription_free>>;
using Report = std::unique_ptr<bv_report, Deleter<bv_report, bv_report_free>>;

Clip load_clip(const std::string& path) {
  bv_clip* c = nullptr;
  check(bv_clip_load_wav(path.c_str(), &c), path);
  return Clip(c);
}

struct AnalysisFlags {
  std::string method = "hfc";
  bv_onset_params onset{};
  bv_feature_config features{};

  AnalysisFlags() {
    bv_onset_params_default(&onset);
    bv_feature_config_default(&features);
  }

  void add_to(CLI::App* app) {
    app->add_option("--onset-method", method, "hfc or spectral_flux")
        ->check(CLI::IsMember({"hfc", "spectral_flux", "flux"}));
    app->add_option("--onset-threshold", onset.threshold, "peak threshold over the local median")
        ->check(CLI::PositiveNumber);
    app->add_option("--min-ioi", onset.min_ioi, "minimum inter-onset interval, seconds")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--silence-gate", onset.silence_gate_db, "frame level gate, dBFS");
    app->add_option("--window", features.window_size, "analysis window, samples");
    app->add_option("--hop", features.hop, "hop size, samples");
    app->add_option("--frames-per-event", features.frames_per_event, "frames pooled per event");
    app->add_option("--n-mels", features.n_mels, "mel bands");
  }

  void resolve() { onset.method = method == "hfc" ? BV_ONSET_HFC : BV_ONSET_SPECTRAL_FLUX; }
};

std::string lowercase_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

Transcription load_events(const std::string& path, const bv_midi_options& midi) {
  const std::string bytes = read_file(path);
  bv_transcription* t = nullptr;
  const std::string ext = lowercase_ext(path);
  if (ext == "mid" || ext == "midi" || bytes.rfind("MThd", 0) == 0)
    check(bv_transcription_from_smf(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size(),
                                    &midi, &t),
          path);
  else
    check(bv_transcription_from_annotations(bytes.data(), bytes.size(), &t), path);
  return Transcription(t);
}

std::map<std::string, size_t> count_by_label(const bv_transcription* t) {
  std::map<std::string, size_t> counts;
  for (size_t i = 0; i < bv_transcription_size(t); ++i) {
    bv_event e;
    check(bv_transcription_event(t, i, &e), "");
    ++counts[e.label];
  }
  return counts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beatvox: user-trained vocal percussion transcription"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bv_version()));

  // train
  auto* train = app.add_subcommand("train", "enrol a model from an exemplar recording");
  std::string train_input, class_spec, model_out;
  size_t k = 1;
  AnalysisFlags train_flags;
  train->add_option("--input,-i", train_input, "WAV with the exemplars in class order")->required();
  train->add_option("--classes,-c", class_spec, "class spec, e.g. kick:5,snare:5,hihat:5")->required();
  train->add_option("--model,-m", model_out, "model file to write")->required();
  train->add_option("--k", k, "neighbours")->check(CLI::PositiveNumber);
  train_flags.add_to(train);

  // transcribe
  auto* tr = app.add_subcommand("transcribe", "transcribe a performance to MIDI");
  std::string tr_input, tr_model, tr_out, tr_csv, tr_map;
  double tempo = 120.0;
  int ppq = 480;
  tr->add_option("--input,-i", tr_input, "performance WAV")->required();
  tr->add_option("--model,-m", tr_model, "model file")->required();
  tr->add_option("--out,-o", tr_out, "SMF to write")->required();
  tr->add_option("--csv", tr_csv, "also write the events as time,label lines");
  tr->add_option("--tempo", tempo, "tempo, BPM")->check(CLI::PositiveNumber);
  tr->add_option("--ppq", ppq, "ticks per quarter note")->check(CLI::Range(1, 32767));
  tr->add_option("--map", tr_map, "note mapping, e.g. kick:35,snare:40");

  // eval
  auto* ev = app.add_subcommand("eval", "score a transcription against annotations");
  std::string ev_pred, ev_ref, ev_format = "text", ev_map;
  double tolerance = 0.05;
  ev->add_option("--pred,-p", ev_pred, "predicted events (.mid or annotation csv)")->required();
  ev->add_option("--ref,-r", ev_ref, "reference annotations")->required();
  ev->add_option("--tolerance,-t", tolerance, "match tolerance, seconds")->check(CLI::NonNegativeNumber);
  ev->add_option("--format,-f", ev_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  ev->add_option("--map", ev_map, "note mapping used to label MIDI input");

  // features
  auto* fe = app.add_subcommand("features", "dump per-onset feature vectors as CSV");
  std::string fe_input, fe_out;
  AnalysisFlags fe_flags;
  fe->add_option("--input,-i", fe_input, "WAV")->required();
  fe->add_option("--out,-o", fe_out, "CSV to write (default stdout)");
  fe_flags.add_to(fe);

  // synth
  auto* sy = app.add_subcommand("synth", "render a synthetic test signal");
  std::string sy_spec, sy_spec_file, sy_out, sy_truth;
  sy->add_option("--spec", sy_spec, "signal description");
  sy->add_option("--spec-file", sy_spec_file, "file holding the signal description");
  sy->add_option("--out,-o", sy_out, "WAV to write")->required();
  sy->add_option("--truth", sy_truth, "write the true onset times, one per line");

  // serve
  auto* sv = app.add_subcommand("serve", "run the HTTP and streaming service");
  int port = beatvox::service::default_port();
  std::string host = "127.0.0.1", data_dir;
  sv->add_option("--port", port, "listen port (default from BEATVOX_PORT or 8080)")
      ->check(CLI::Range(1, 65535));
  sv->add_option("--host", host, "listen address");
  sv->add_option("--data-dir", data_dir, "persist model documents here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*train) {
      train_flags.resolve();
      Clip clip = load_clip(train_input);
      bv_train_options opts;
      bv_train_options_default(&opts);
      opts.class_spec = class_spec.c_str();
      opts.k = k;
      opts.onset = train_flags.onset;
      opts.features = train_flags.features;
      bv_model* m = nullptr;
      size_t found = 0, expected = 0;
      const bv_status st = bv_model_train(clip.get(), &opts, &m, &found, &expected);
      if (st == BV_ERR_INVALID_ARGUMENT || st == BV_ERR_FORMAT)
        throw Failure{kExitError, std::string("usage: ") + bv_last_error()};
      check(st, "");
      Model model(m);
      check(bv_model_save(model.get(), model_out.c_str()), model_out);
      std::printf("onsets found: %zu of %zu\n", found, expected);
      std::printf("selected features:");
      for (size_t i = 0; i < bv_model_selected_count(model.get()); ++i)
        std::printf(" %s", bv_feature_name(bv_model_selected_feature(model.get(), i)));
      std::printf("\nleave-one-out accuracy: %.3f\n", bv_model_training_accuracy(model.get()));
      std::printf("model written to %s\n", model_out.c_str());
    } else if (*tr) {
      bv_model* m = nullptr;
      check(bv_model_load(tr_model.c_str(), &m), tr_model);
      Model model(m);
      Clip clip = load_clip(tr_input);
      bv_transcription* t = nullptr;
      check(bv_transcribe(model.get(), clip.get(), &t), tr_input);
      Transcription trans(t);
      bv_midi_options midi;
      bv_midi_options_default(&midi);
      midi.tempo_bpm = tempo;
      midi.ppq = ppq;
      if (!tr_map.empty()) midi.mapping = tr_map.c_str();
      uint8_t* bytes = nullptr;
      size_t size = 0;
      check(bv_transcription_to_smf(trans.get(), &midi, &bytes, &size), "midi");
      std::unique_ptr<uint8_t, Deleter<uint8_t, bv_bytes_free>> owned(bytes);
      write_file(tr_out, bytes, size);
      if (!tr_csv.empty()) {
        char* text = nullptr;
        check(bv_transcription_to_annotations(trans.get(), &text), "");
        const std::string s(text);
        bv_string_free(text);
        write_file(tr_csv, s.data(), s.size());
      }
      std::printf("events: %zu\n", bv_transcription_size(trans.get()));
      for (const auto& [label, n] : count_by_label(trans.get())) std::printf("  %s: %zu\n", label.c_str(), n);
    } else if (*ev) {
      bv_midi_options midi;
      bv_midi_options_default(&midi);
      if (!ev_map.empty()) midi.mapping = ev_map.c_str();
      Transcription pred = load_events(ev_pred, midi);
      Transcription ref = load_events(ev_ref, midi);
      bv_report* r = nullptr;
      check(bv_evaluate(pred.get(), ref.get(), tolerance, &r), "eval");
      Report report(r);
      char* text = nullptr;
      check(bv_report_render(report.get(), ev_format == "csv" ? BV_REPORT_CSV : BV_REPORT_TEXT, &text), "");
      std::fputs(text, stdout);
      bv_string_free(text);
    } else if (*fe) {
      fe_flags.resolve();
      Clip clip = load_clip(fe_input);
      char* csv = nullptr;
      check(bv_features_csv(clip.get(), &fe_flags.onset, &fe_flags.features, &csv), fe_input);
      const std::string s(csv);
      bv_string_free(csv);
      if (fe_out.empty())
        std::fputs(s.c_str(), stdout);
      else
        write_file(fe_out, s.data(), s.size());
    } else if (*sy) {
      if (sy_spec.empty() == sy_spec_file.empty())
        throw Failure{kExitError, "usage: give exactly one of --spec and --spec-file"};
      const std::string spec = sy_spec.empty() ? read_file(sy_spec_file) : sy_spec;
      bv_clip* c = nullptr;
      check(bv_clip_synth(spec.c_str(), &c), "synth");
      Clip clip(c);
      check(bv_clip_save_wav(clip.get(), sy_out.c_str()), sy_out);
      if (!sy_truth.empty()) {
        std::string lines;
        char buf[64];
        for (size_t i = 0; i < bv_clip_true_onset_count(clip.get()); ++i) {
          std::snprintf(buf, sizeof buf, "%.6f\n", bv_clip_true_onset(clip.get(), i));
          lines += buf;
        }
        write_file(sy_truth, lines.data(), lines.size());
      }
    } else if (*sv) {
      if (!beatvox::service::serve(host, port, {data_dir}))
        throw Failure{kExitError, "cannot listen on " + host + ":" + std::to_string(port)};
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "beatvox: %s\n", f.message.c_str());
    return f.code;
  }
  return kExitOk;
}
