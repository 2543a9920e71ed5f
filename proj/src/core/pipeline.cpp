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

#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "error.hpp"

namespace beatvox {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Class plan

std::size_t ClassSpec::total() const {
  std::size_t n = 0;
  for (const auto& [name, count] : classes) n += count;
  return n;
}

std::vector<std::string> ClassSpec::names() const {
  std::vector<std::string> out;
  for (const auto& [name, count] : classes) out.push_back(name);
  return out;
}

void ClassSpec::validate() const {
  if (classes.size() < 2)
    throw Error(ErrorKind::kInvalidArgument, "class spec needs at least two classes");
  std::set<std::string> seen;
  for (const auto& [name, count] : classes) {
    if (name.empty()) throw Error(ErrorKind::kInvalidArgument, "empty class name");
    if (count < 1)
      throw Error(ErrorKind::kInvalidArgument, "class '" + name + "' needs at least one exemplar");
    if (!seen.insert(name).second)
      throw Error(ErrorKind::kInvalidArgument, "duplicate class '" + name + "'");
  }
}

ClassSpec parse_class_spec(std::string_view text) {
  ClassSpec spec;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw Error(ErrorKind::kInvalidArgument,
                  "class spec item '" + std::string(item) + "' is not name:count");
    const std::string_view name = item.substr(0, colon);
    const std::string_view digits = item.substr(colon + 1);
    std::size_t count = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
      throw Error(ErrorKind::kInvalidArgument,
                  "class spec item '" + std::string(item) + "' has a bad count");
    spec.classes.emplace_back(std::string(name), count);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Model

void UserModel::validate() const {
  if (version != kModelVersion)
    throw Error(ErrorKind::kVersion, "unsupported model version " + std::to_string(version));
  dataset.validate();
  if (dataset.size() < 2 || dataset.class_names.size() < 2)
    throw Error(ErrorKind::kInvalidArgument, "model needs two classes and two vectors");
  check_mask(mask);
  if (k < 1 || k > dataset.size())
    throw Error(ErrorKind::kInvalidArgument, "model k out of range");
  feature_config.validate();
  onset_params.validate();
  if (!std::isfinite(onset_params.silence_gate_db))
    throw Error(ErrorKind::kInvalidArgument, "silence gate must be finite");
  if (!(training_accuracy >= 0.0 && training_accuracy <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "training accuracy outside [0, 1]");
}

UserModel train_user_model(const AudioClip& clip, const ClassSpec& spec,
                           const FeatureConfig& config, const OnsetParams& onset_params,
                           std::size_t k) {
  spec.validate();
  config.validate();
  onset_params.validate();
  const auto onsets = detect_onsets(clip, onset_params, config.window_size, config.hop);
  if (onsets.size() != spec.total()) throw OnsetCountError(onsets.size(), spec.total());

  UserModel model;
  model.sample_rate = clip.sample_rate();
  model.feature_config = config;
  model.onset_params = onset_params;
  model.k = k;
  model.dataset.class_names = spec.names();

  const FeatureExtractor extractor(config, clip.sample_rate());
  std::size_t next = 0;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    for (std::size_t i = 0; i < spec.classes[c].second; ++i, ++next) {
      model.dataset.vectors.push_back(extractor.extract(clip.samples(), onsets[next].time));
      model.dataset.labels.push_back(c);
    }
  }
  model.normalizer = fit_normalizer(model.dataset);
  const SelectionResult selection = sfs_select(model.dataset, k);
  model.mask = selection.selected;
  model.training_accuracy = selection.final_accuracy;
  model.validate();
  return model;
}

int velocity_from_peak(double peak) {
  const double v = 1.0 + std::clamp(peak, 0.0, 1.0) * 126.0;
  return std::clamp(static_cast<int>(std::floor(v + 0.5)), 1, 127);
}

EventClassifier::EventClassifier(const UserModel& model)
    : model_(model),
      extractor_(model.feature_config, model.sample_rate),
      index_(model.dataset, model.normalizer) {}

DrumEvent EventClassifier::classify(std::span<const double> samples, double onset_time) const {
  const FeatureVector fv = extractor_.extract(samples, onset_time);
  const auto result = index_.classify(normalize(fv, model_.normalizer), model_.mask, model_.k);
  const EventSpan span = event_span(onset_time, model_.sample_rate, model_.feature_config);
  return {onset_time, model_.class_names()[result.label],
          velocity_from_peak(segment_peak(samples, span))};
}

Transcription transcribe(const AudioClip& clip, const UserModel& model) {
  model.validate();
  if (clip.sample_rate() != model.sample_rate)
    throw Error(ErrorKind::kInvalidArgument, "clip sample rate differs from the model's");
  Transcription t;
  t.duration = clip.duration();
  t.model_id = model_fingerprint(model);
  if (clip.empty()) return t;
  const auto onsets = detect_onsets(clip, model.onset_params,
                                    model.feature_config.window_size,
                                    model.feature_config.hop);
  const EventClassifier classifier(model);
  for (const auto& onset : onsets)
    t.events.push_back(classifier.classify(clip.samples(), onset.time));
  return t;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <typename T>
T require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorKind::kFormat, std::string("model: missing key '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kFormat, std::string("model: key '") + key + "' has the wrong type");
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw Error(ErrorKind::kFormat, std::string("model: non-finite value in ") + what);
}

FeatureArray feature_array(const json& arr, const char* what) {
  if (!arr.is_array() || arr.size() != kFeatureCount)
    throw Error(ErrorKind::kFormat, std::string("model: ") + what + " must hold 20 numbers");
  FeatureArray out{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (!arr[j].is_number())
      throw Error(ErrorKind::kFormat, std::string("model: ") + what + " must hold numbers");
    out[j] = arr[j].get<double>();
    require_finite(out[j], what);
  }
  return out;
}

}  // namespace

std::string save_model(const UserModel& model) {
  model.validate();
  json doc;
  doc["version"] = model.version;
  doc["class_names"] = model.class_names();
  doc["feature_names"] = feature_names();
  const auto& fc = model.feature_config;
  doc["feature_config"] = {{"sample_rate", model.sample_rate},
                           {"window_size", fc.window_size},
                           {"hop", fc.hop},
                           {"frames_per_event", fc.frames_per_event},
                           {"n_mels", fc.n_mels},
                           {"n_mfcc", fc.n_mfcc},
                           {"rolloff_fraction", fc.rolloff_fraction}};
  const auto& op = model.onset_params;
  doc["onset_params"] = {{"method", to_string(op.method)},
                         {"threshold", op.threshold},
                         {"min_ioi", op.min_ioi},
                         {"silence_gate_db", op.silence_gate_db}};
  doc["k"] = model.k;
  doc["mask"] = model.mask;
  doc["normalizer"] = {{"mean", model.normalizer.mean}, {"std", model.normalizer.std}};
  json vectors = json::array();
  json labels = json::array();
  for (std::size_t i = 0; i < model.dataset.size(); ++i) {
    vectors.push_back(model.dataset.vectors[i].values);
    labels.push_back(model.class_names()[model.dataset.labels[i]]);
  }
  doc["training"] = {{"vectors", vectors}, {"labels", labels}};
  doc["training_accuracy"] = model.training_accuracy;
  return doc.dump(2) + "\n";
}

UserModel load_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("model: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kFormat, "model: document must be an object");
  const int version = require<int>(doc, "version");
  if (version != kModelVersion)
    throw Error(ErrorKind::kVersion, "model: unsupported version " + std::to_string(version) +
                                         " (expected " + std::to_string(kModelVersion) + ")");
  UserModel m;
  m.version = version;
  m.dataset.class_names = require<std::vector<std::string>>(doc, "class_names");
  const auto names = require<std::vector<std::string>>(doc, "feature_names");
  if (!std::equal(names.begin(), names.end(), feature_names().begin(), feature_names().end()))
    throw Error(ErrorKind::kFormat, "model: feature_names differ from the canonical order");

  const json fc = require<json>(doc, "feature_config");
  m.sample_rate = require<int>(fc, "sample_rate");
  m.feature_config.window_size = require<std::size_t>(fc, "window_size");
  m.feature_config.hop = require<std::size_t>(fc, "hop");
  m.feature_config.frames_per_event = require<std::size_t>(fc, "frames_per_event");
  m.feature_config.n_mels = require<std::size_t>(fc, "n_mels");
  m.feature_config.n_mfcc = require<std::size_t>(fc, "n_mfcc");
  m.feature_config.rolloff_fraction = require<double>(fc, "rolloff_fraction");

  const json op = require<json>(doc, "onset_params");
  m.onset_params.method = onset_method_from_string(require<std::string>(op, "method"));
  m.onset_params.threshold = require<double>(op, "threshold");
  m.onset_params.min_ioi = require<double>(op, "min_ioi");
  m.onset_params.silence_gate_db = require<double>(op, "silence_gate_db");
  require_finite(m.onset_params.threshold, "onset_params");
  require_finite(m.onset_params.min_ioi, "onset_params");
  require_finite(m.onset_params.silence_gate_db, "onset_params");

  m.k = require<std::size_t>(doc, "k");
  m.mask = require<std::vector<std::size_t>>(doc, "mask");
  const json norm = require<json>(doc, "normalizer");
  m.normalizer.mean = feature_array(require<json>(norm, "mean"), "normalizer.mean");
  m.normalizer.std = feature_array(require<json>(norm, "std"), "normalizer.std");

  const json training = require<json>(doc, "training");
  const json vectors = require<json>(training, "vectors");
  const auto labels = require<std::vector<std::string>>(training, "labels");
  if (!vectors.is_array() || vectors.size() != labels.size())
    throw Error(ErrorKind::kFormat, "model: training vectors and labels differ in length");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    FeatureVector fv;
    fv.values = feature_array(vectors[i], "training.vectors");
    const auto& cls = m.dataset.class_names;
    const auto it = std::find(cls.begin(), cls.end(), labels[i]);
    if (it == cls.end())
      throw Error(ErrorKind::kFormat, "model: training label '" + labels[i] + "' is not a class");
    m.dataset.vectors.push_back(fv);
    m.dataset.labels.push_back(static_cast<std::size_t>(it - cls.begin()));
  }
  m.training_accuracy = require<double>(doc, "training_accuracy");
  require_finite(m.training_accuracy, "training_accuracy");
  try {
    m.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kVersion) throw;
    throw Error(ErrorKind::kFormat, std::string("model: ") + e.what());
  }
  return m;
}

void save_model_file(const UserModel& model, const std::string& path) {
  const std::string doc = save_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << doc;
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path);
}

UserModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  const std::string doc((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_model(doc);
}

std::string model_fingerprint(const UserModel& model) {
  // 64-bit FNV-1a over the canonical document.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : save_model(model)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace beatvox
