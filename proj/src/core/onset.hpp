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

#ifndef BEATVOX_CORE_ONSET_HPP_
#define BEATVOX_CORE_ONSET_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "audio.hpp"

namespace beatvox {

enum class OnsetMethod { kHfc, kSpectralFlux };

std::string to_string(OnsetMethod method);
OnsetMethod onset_method_from_string(const std::string& name);

struct OnsetParams {
  OnsetMethod method = OnsetMethod::kHfc;
  double threshold = 1.5;         // multiplier on the local median
  double min_ioi = 0.050;         // seconds
  double silence_gate_db = -60.0; // frames at or below this level are ignored

  void validate() const;
};

struct OnsetCurve {
  std::vector<double> values;
  std::size_t hop = kDefaultHop;
  int sample_rate = kCanonicalSampleRate;
};

struct OnsetEvent {
  double time = 0.0;      // seconds
  double strength = 0.0;  // detection value at the peak
  std::size_t frame = 0;
};

// Per-frame detection values.
double hfc_value(std::span<const double> magnitude);
double flux_value(std::span<const double> magnitude,
                  std::span<const double> previous);  // empty = zero spectrum

OnsetCurve odf_hfc(const std::vector<Frame>& frames, std::size_t hop = kDefaultHop,
                   int sample_rate = kCanonicalSampleRate);
OnsetCurve odf_spectral_flux(const std::vector<Frame>& frames,
                             std::size_t hop = kDefaultHop,
                             int sample_rate = kCanonicalSampleRate);

// Incremental peak picker. Frame i is decided once frames up to i+3 are
// known (or the stream has ended), so the offline and streaming paths make
// identical decisions.
class PeakPicker {
 public:
  static constexpr std::size_t kMaxRadius = 3;   // strict local max over [i-3, i+3]
  static constexpr std::size_t kMedianPast = 8;  // median over [i-8, i+1]
  static constexpr std::size_t kMedianFuture = 1;

  PeakPicker(const OnsetParams& params, std::size_t hop, int sample_rate);

  void push(double value, double level_db);
  // Decides every frame whose neighbourhood is complete. With `final` the
  // stream is closed and all remaining frames are decided.
  std::vector<OnsetEvent> poll(bool final);

  std::size_t frames_seen() const { return values_.size(); }

 private:
  bool is_onset(std::size_t i, std::size_t n) const;

  OnsetParams params_;
  std::size_t hop_;
  int sample_rate_;
  std::vector<double> values_;
  std::vector<double> levels_;
  std::size_t next_ = 0;
  std::optional<std::size_t> last_onset_;
};

std::vector<OnsetEvent> pick_onsets(const OnsetCurve& curve,
                                    const OnsetParams& params,
                                    std::span<const double> frame_levels_db);

std::vector<OnsetEvent> detect_onsets(const AudioClip& clip,
                                      const OnsetParams& params = {},
                                      std::size_t window_size = kDefaultWindowSize,
                                      std::size_t hop = kDefaultHop);

}  // namespace beatvox

#endif  // BEATVOX_CORE_ONSET_HPP_
