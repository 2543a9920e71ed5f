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

#ifndef BEATVOX_CORE_PIPELINE_HPP_
#define BEATVOX_CORE_PIPELINE_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "audio.hpp"
#include "features.hpp"
#include "learn.hpp"
#include "onset.hpp"

namespace beatvox {

inline constexpr int kModelVersion = 1;

// Enrolment plan: exemplars are vocalised class by class in this order.
struct ClassSpec {
  std::vector<std::pair<std::string, std::size_t>> classes;

  std::size_t total() const;
  std::vector<std::string> names() const;
  void validate() const;
};

// "name:count[,name:count...]"
ClassSpec parse_class_spec(std::string_view text);

struct UserModel {
  int version = kModelVersion;
  int sample_rate = kCanonicalSampleRate;
  LabeledDataset dataset;  // carries class_names
  Normalizer normalizer;
  FeatureMask mask;
  std::size_t k = 1;
  FeatureConfig feature_config;
  OnsetParams onset_params;
  double training_accuracy = 0.0;

  const std::vector<std::string>& class_names() const { return dataset.class_names; }
  void validate() const;
};

struct DrumEvent {
  double time = 0.0;
  std::string label;
  int velocity = 100;
};

struct Transcription {
  std::vector<DrumEvent> events;
  double duration = 0.0;
  std::string model_id;
};

UserModel train_user_model(const AudioClip& clip, const ClassSpec& spec,
                           const FeatureConfig& config = {},
                           const OnsetParams& onset_params = {}, std::size_t k = 1);

Transcription transcribe(const AudioClip& clip, const UserModel& model);

// Peak amplitude in [0, 1] mapped linearly onto MIDI velocity 1..127,
// rounding half up.
int velocity_from_peak(double peak);

// Classifies one event of a signal; shared by the offline and live paths.
class EventClassifier {
 public:
  explicit EventClassifier(const UserModel& model);

  DrumEvent classify(std::span<const double> samples, double onset_time) const;
  const FeatureExtractor& extractor() const { return extractor_; }

 private:
  const UserModel& model_;
  FeatureExtractor extractor_;
  KnnIndex index_;
};

std::string save_model(const UserModel& model);
UserModel load_model(std::string_view document);
void save_model_file(const UserModel& model, const std::string& path);
UserModel load_model_file(const std::string& path);

// Stable identifier derived from the serialized model.
std::string model_fingerprint(const UserModel& model);

}  // namespace beatvox

#endif  // BEATVOX_CORE_PIPELINE_HPP_
