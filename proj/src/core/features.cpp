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

#include "features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "error.hpp"

namespace beatvox {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "mfcc_0",  "mfcc_1",      "mfcc_2",    "mfcc_3",     "mfcc_4",
      "mfcc_5",  "mfcc_6",      "mfcc_7",    "mfcc_8",     "mfcc_9",
      "mfcc_10", "mfcc_11",     "mfcc_12",   "centroid_hz", "spread_hz",
      "slope",   "decrease",    "rolloff_hz", "zcr_per_s", "zc_count"};
  return names;
}

void FeatureConfig::validate() const {
  check_framing(window_size, hop);
  if (frames_per_event < 1)
    throw Error(ErrorKind::kInvalidArgument, "frames_per_event must be >= 1");
  if (n_mels < 2) throw Error(ErrorKind::kInvalidArgument, "n_mels must be >= 2");
  if (n_mfcc > n_mels) throw Error(ErrorKind::kInvalidArgument, "n_mfcc must not exceed n_mels");
  // The feature vector layout reserves exactly 13 cepstral slots.
  if (n_mfcc != kNumMfcc)
    throw Error(ErrorKind::kInvalidArgument, "n_mfcc must be 13 for the 20-value feature layout");
  if (!(rolloff_fraction > 0.0 && rolloff_fraction <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "rolloff_fraction must be in (0, 1]");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> bin_frequencies(std::size_t window_size, int sample_rate) {
  std::vector<double> f(window_size / 2 + 1);
  for (std::size_t b = 0; b < f.size(); ++b)
    f[b] = static_cast<double>(b) * sample_rate / static_cast<double>(window_size);
  return f;
}

// ---------------------------------------------------------------------------
// Mel filterbank

MelFilterbank::MelFilterbank(int sample_rate, std::size_t n_fft_bins, std::size_t n_mels)
    : n_bins_(n_fft_bins) {
  if (n_mels < 2) throw Error(ErrorKind::kInvalidArgument, "n_mels must be >= 2");
  if (n_fft_bins < 2 || sample_rate <= 0)
    throw Error(ErrorKind::kInvalidArgument, "bad filterbank geometry");
  const double nyquist = sample_rate / 2.0;
  const double top = hz_to_mel(nyquist);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t j = 0; j < edges.size(); ++j)
    edges[j] = mel_to_hz(top * static_cast<double>(j) / static_cast<double>(n_mels + 1));

  // Bin b sits at b * nyquist / (n_fft_bins - 1).
  const double bin_hz = nyquist / static_cast<double>(n_fft_bins - 1);
  weights_.assign(n_mels, std::vector<double>(n_fft_bins, 0.0));
  centers_.resize(n_mels);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    centers_[m] = mid;
    double peak = 0.0;
    for (std::size_t b = 0; b < n_fft_bins; ++b) {
      const double f = static_cast<double>(b) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      weights_[m][b] = w;
      peak = std::max(peak, w);
    }
    if (peak <= 0.0)
      throw Error(ErrorKind::kInvalidArgument,
                  "mel filter " + std::to_string(m) + " covers no FFT bin; reduce n_mels");
  }
}

std::vector<double> MelFilterbank::apply(std::span<const double> power) const {
  if (power.size() != n_bins_)
    throw Error(ErrorKind::kInvalidArgument, "spectrum length does not match filterbank");
  std::vector<double> e(weights_.size(), 0.0);
  for (std::size_t m = 0; m < weights_.size(); ++m) {
    double acc = 0.0;
    for (std::size_t b = 0; b < n_bins_; ++b) acc += weights_[m][b] * power[b];
    e[m] = acc;
  }
  return e;
}

std::vector<double> mfcc(std::span<const double> power_spectrum,
                         const MelFilterbank& filterbank, std::size_t n_mfcc) {
  const std::size_t m_count = filterbank.num_filters();
  if (n_mfcc > m_count)
    throw Error(ErrorKind::kInvalidArgument, "n_mfcc must not exceed n_mels");
  std::vector<double> loge = filterbank.apply(power_spectrum);
  for (double& v : loge) v = std::log(std::max(kLogFloor, v));

  // Orthonormal DCT-II.
  const double m_d = static_cast<double>(m_count);
  std::vector<double> c(n_mfcc, 0.0);
  for (std::size_t k = 0; k < n_mfcc; ++k) {
    double acc = 0.0;
    for (std::size_t m = 0; m < m_count; ++m)
      acc += loge[m] * std::cos(std::numbers::pi * static_cast<double>(k) *
                                (static_cast<double>(m) + 0.5) / m_d);
    c[k] = acc * (k == 0 ? std::sqrt(1.0 / m_d) : std::sqrt(2.0 / m_d));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Spectral shape

SpectralDescriptors spectral_descriptors(std::span<const double> magnitude,
                                         std::span<const double> bin_freqs,
                                         double rolloff_fraction) {
  if (magnitude.size() != bin_freqs.size())
    throw Error(ErrorKind::kInvalidArgument, "magnitude and frequency lengths differ");
  SpectralDescriptors d;
  const std::size_t n = magnitude.size();
  double total = 0.0;
  double total_power = 0.0;
  for (double x : magnitude) {
    if (x < 0.0) throw Error(ErrorKind::kInvalidArgument, "negative magnitude");
    total += x;
    total_power += x * x;
  }
  if (n == 0 || total <= 0.0) return d;

  for (std::size_t b = 0; b < n; ++b) d.centroid_hz += bin_freqs[b] * magnitude[b] / total;
  double var = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double dev = bin_freqs[b] - d.centroid_hz;
    var += dev * dev * magnitude[b] / total;
  }
  d.spread_hz = std::sqrt(var);

  double f_mean = 0.0, x_mean = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    f_mean += bin_freqs[b];
    x_mean += magnitude[b];
  }
  f_mean /= static_cast<double>(n);
  x_mean /= static_cast<double>(n);
  double cov = 0.0, f_var = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    cov += (bin_freqs[b] - f_mean) * (magnitude[b] - x_mean);
    f_var += (bin_freqs[b] - f_mean) * (bin_freqs[b] - f_mean);
  }
  d.slope = f_var > 0.0 ? cov / f_var : 0.0;

  double num = 0.0, den = 0.0;
  for (std::size_t b = 1; b < n; ++b) {
    num += (magnitude[b] - magnitude[0]) / static_cast<double>(b);
    den += magnitude[b];
  }
  d.decrease = den > 0.0 ? num / den : 0.0;

  const double target = rolloff_fraction * total_power;
  double cum = 0.0;
  d.rolloff_hz = bin_freqs[n - 1];
  for (std::size_t b = 0; b < n; ++b) {
    cum += magnitude[b] * magnitude[b];
    if (cum >= target) {
      d.rolloff_hz = bin_freqs[b];
      break;
    }
  }
  return d;
}

ZeroCrossingStats zero_crossing_stats(std::span<const double> segment, int sample_rate) {
  if (segment.empty()) throw Error(ErrorKind::kInvalidArgument, "empty segment");
  ZeroCrossingStats z;
  for (std::size_t i = 1; i < segment.size(); ++i)
    if ((segment[i] >= 0.0) != (segment[i - 1] >= 0.0)) ++z.count;
  z.rate_per_s = static_cast<double>(z.count) * sample_rate /
                 static_cast<double>(segment.size());
  return z;
}

// ---------------------------------------------------------------------------
// Per-event extraction

EventSpan event_span(double onset_time, int sample_rate, const FeatureConfig& config) {
  const auto onset_sample =
      static_cast<std::size_t>(std::llround(std::max(0.0, onset_time) * sample_rate));
  EventSpan s;
  s.first_frame = onset_sample / config.hop;
  s.begin = s.first_frame * config.hop;
  s.end = s.begin + (config.frames_per_event - 1) * config.hop + config.window_size;
  return s;
}

FeatureExtractor::FeatureExtractor(const FeatureConfig& config, int sample_rate)
    : config_(config),
      sample_rate_(sample_rate),
      filterbank_((config.validate(), sample_rate), config.window_size / 2 + 1,
                  config.n_mels),
      bin_freqs_(bin_frequencies(config.window_size, sample_rate)) {}

FeatureVector FeatureExtractor::extract(std::span<const double> samples,
                                        double onset_time) const {
  if (!(onset_time >= 0.0) ||
      std::llround(onset_time * sample_rate_) >= static_cast<long long>(samples.size()))
    throw Error(ErrorKind::kInvalidArgument, "onset lies beyond the end of the clip");
  const EventSpan span = event_span(onset_time, sample_rate_, config_);

  FeatureVector fv;
  fv.onset_time = onset_time;
  const double frames_d = static_cast<double>(config_.frames_per_event);
  for (std::size_t k = 0; k < config_.frames_per_event; ++k) {
    const std::size_t index = span.first_frame + k;
    const Frame f = analyze_frame(samples, index, index * config_.hop, config_.window_size);
    const auto c = mfcc(f.power_spectrum, filterbank_, config_.n_mfcc);
    for (std::size_t j = 0; j < kNumMfcc; ++j) fv.values[kMfcc0 + j] += c[j] / frames_d;
    const auto d = spectral_descriptors(f.magnitude_spectrum, bin_freqs_,
                                        config_.rolloff_fraction);
    fv.values[kCentroid] += d.centroid_hz / frames_d;
    fv.values[kSpread] += d.spread_hz / frames_d;
    fv.values[kSlope] += d.slope / frames_d;
    fv.values[kDecrease] += d.decrease / frames_d;
    fv.values[kRolloff] += d.rolloff_hz / frames_d;
  }

  std::vector<double> segment(span.end - span.begin, 0.0);
  for (std::size_t i = span.begin; i < span.end && i < samples.size(); ++i)
    segment[i - span.begin] = samples[i];
  const auto z = zero_crossing_stats(segment, sample_rate_);
  fv.values[kZcrPerSecond] = z.rate_per_s;
  fv.values[kZcCount] = static_cast<double>(z.count);
  return fv;
}

FeatureVector event_features(const AudioClip& clip, const OnsetEvent& onset,
                             const FeatureConfig& config) {
  return FeatureExtractor(config, clip.sample_rate()).extract(clip.samples(), onset.time);
}

double segment_peak(std::span<const double> samples, const EventSpan& span) {
  double peak = 0.0;
  for (std::size_t i = span.begin; i < span.end && i < samples.size(); ++i)
    peak = std::max(peak, std::abs(samples[i]));
  return peak;
}

}  // namespace beatvox
