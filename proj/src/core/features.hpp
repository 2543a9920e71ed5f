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

#ifndef BEATVOX_CORE_FEATURES_HPP_
#define BEATVOX_CORE_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "audio.hpp"
#include "onset.hpp"

namespace beatvox {

inline constexpr std::size_t kNumMfcc = 13;
inline constexpr std::size_t kFeatureCount = 20;

// Canonical order; part of the model file contract.
enum FeatureIndex : std::size_t {
  kMfcc0 = 0,
  kCentroid = 13,
  kSpread = 14,
  kSlope = 15,
  kDecrease = 16,
  kRolloff = 17,
  kZcrPerSecond = 18,
  kZcCount = 19,
};

const std::array<std::string, kFeatureCount>& feature_names();

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  double onset_time = 0.0;
};

struct FeatureConfig {
  std::size_t window_size = kDefaultWindowSize;
  std::size_t hop = kDefaultHop;
  std::size_t frames_per_event = 4;
  std::size_t n_mels = 40;
  std::size_t n_mfcc = kNumMfcc;
  double rolloff_fraction = 0.95;

  void validate() const;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with centres equally spaced in mel between 0 Hz and
// Nyquist, each peaking at 1 and reaching 0 at its neighbours' centres.
class MelFilterbank {
 public:
  MelFilterbank(int sample_rate, std::size_t n_fft_bins, std::size_t n_mels);

  std::size_t num_filters() const { return weights_.size(); }
  std::size_t num_bins() const { return n_bins_; }
  std::span<const double> filter(std::size_t m) const { return weights_[m]; }
  const std::vector<double>& center_hz() const { return centers_; }

  // Filter energies sum_b filter_m[b] * power[b].
  std::vector<double> apply(std::span<const double> power) const;

 private:
  std::size_t n_bins_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> centers_;
};

inline constexpr double kLogFloor = 1e-10;

std::vector<double> mfcc(std::span<const double> power_spectrum,
                         const MelFilterbank& filterbank,
                         std::size_t n_mfcc = kNumMfcc);

struct SpectralDescriptors {
  double centroid_hz = 0.0;
  double spread_hz = 0.0;
  double slope = 0.0;
  double decrease = 0.0;
  double rolloff_hz = 0.0;
};

SpectralDescriptors spectral_descriptors(std::span<const double> magnitude,
                                         std::span<const double> bin_freqs,
                                         double rolloff_fraction = 0.95);

struct ZeroCrossingStats {
  std::size_t count = 0;
  double rate_per_s = 0.0;
};

ZeroCrossingStats zero_crossing_stats(std::span<const double> segment,
                                      int sample_rate);

std::vector<double> bin_frequencies(std::size_t window_size, int sample_rate);

// Sample range [begin, end) analysed for an event whose onset falls in
// `frame`; `end` may run past the clip, in which case it reads as zeros.
struct EventSpan {
  std::size_t first_frame = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

EventSpan event_span(double onset_time, int sample_rate, const FeatureConfig& config);

// Reusable extractor with a prebuilt filterbank; immutable and shareable.
class FeatureExtractor {
 public:
  FeatureExtractor(const FeatureConfig& config, int sample_rate);

  const FeatureConfig& config() const { return config_; }
  int sample_rate() const { return sample_rate_; }

  // `samples` is the whole signal known so far; reads past its end are zero.
  FeatureVector extract(std::span<const double> samples, double onset_time) const;

 private:
  FeatureConfig config_;
  int sample_rate_;
  MelFilterbank filterbank_;
  std::vector<double> bin_freqs_;
};

FeatureVector event_features(const AudioClip& clip, const OnsetEvent& onset,
                             const FeatureConfig& config = {});

// Largest |x| over the event's analysis span.
double segment_peak(std::span<const double> samples, const EventSpan& span);

}  // namespace beatvox

#endif  // BEATVOX_CORE_FEATURES_HPP_
