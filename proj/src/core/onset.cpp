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

#include "onset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace beatvox {

std::string to_string(OnsetMethod method) {
  return method == OnsetMethod::kHfc ? "hfc" : "spectral_flux";
}

OnsetMethod onset_method_from_string(const std::string& name) {
  if (name == "hfc") return OnsetMethod::kHfc;
  if (name == "spectral_flux" || name == "flux") return OnsetMethod::kSpectralFlux;
  throw Error(ErrorKind::kInvalidArgument, "unknown onset method '" + name + "'");
}

void OnsetParams::validate() const {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw Error(ErrorKind::kInvalidArgument, "onset threshold must be positive");
  if (!(min_ioi >= 0.0) || !std::isfinite(min_ioi))
    throw Error(ErrorKind::kInvalidArgument, "min_ioi must be non-negative");
  if (std::isnan(silence_gate_db))
    throw Error(ErrorKind::kInvalidArgument, "silence gate must be a number");
}

double hfc_value(std::span<const double> magnitude) {
  double acc = 0.0;
  for (std::size_t b = 0; b < magnitude.size(); ++b)
    acc += static_cast<double>(b + 1) * magnitude[b];
  return acc;
}

double flux_value(std::span<const double> magnitude,
                  std::span<const double> previous) {
  double acc = 0.0;
  for (std::size_t b = 0; b < magnitude.size(); ++b) {
    const double prev = b < previous.size() ? previous[b] : 0.0;
    acc += std::max(0.0, magnitude[b] - prev);
  }
  return acc;
}

OnsetCurve odf_hfc(const std::vector<Frame>& frames, std::size_t hop, int sample_rate) {
  if (frames.empty()) throw Error(ErrorKind::kInvalidArgument, "no frames");
  OnsetCurve curve{{}, hop, sample_rate};
  curve.values.reserve(frames.size());
  for (const auto& f : frames) curve.values.push_back(hfc_value(f.magnitude_spectrum));
  return curve;
}

OnsetCurve odf_spectral_flux(const std::vector<Frame>& frames, std::size_t hop,
                             int sample_rate) {
  if (frames.empty()) throw Error(ErrorKind::kInvalidArgument, "no frames");
  OnsetCurve curve{{}, hop, sample_rate};
  curve.values.reserve(frames.size());
  std::span<const double> prev;
  for (const auto& f : frames) {
    curve.values.push_back(flux_value(f.magnitude_spectrum, prev));
    prev = f.magnitude_spectrum;
  }
  return curve;
}

// ---------------------------------------------------------------------------

PeakPicker::PeakPicker(const OnsetParams& params, std::size_t hop, int sample_rate)
    : params_(params), hop_(hop), sample_rate_(sample_rate) {
  params_.validate();
  if (hop_ == 0 || sample_rate_ <= 0)
    throw Error(ErrorKind::kInvalidArgument, "bad hop or sample rate");
}

void PeakPicker::push(double value, double level_db) {
  values_.push_back(value);
  levels_.push_back(level_db);
}

bool PeakPicker::is_onset(std::size_t i, std::size_t n) const {
  const double v = values_[i];
  if (!(levels_[i] > params_.silence_gate_db)) return false;

  const std::size_t lo = i >= kMaxRadius ? i - kMaxRadius : 0;
  const std::size_t hi = std::min(n - 1, i + kMaxRadius);
  for (std::size_t j = lo; j <= hi; ++j)
    if (j != i && !(v > values_[j])) return false;

  const std::size_t mlo = i >= kMedianPast ? i - kMedianPast : 0;
  const std::size_t mhi = std::min(n - 1, i + kMedianFuture);
  std::vector<double> window(values_.begin() + static_cast<std::ptrdiff_t>(mlo),
                             values_.begin() + static_cast<std::ptrdiff_t>(mhi) + 1);
  std::sort(window.begin(), window.end());
  const std::size_t m = window.size();
  const double median = m % 2 ? window[m / 2] : 0.5 * (window[m / 2 - 1] + window[m / 2]);
  if (!(v > params_.threshold * median)) return false;

  if (last_onset_) {
    const double gap = static_cast<double>((i - *last_onset_) * hop_);
    if (gap < params_.min_ioi * sample_rate_ - 1e-9) return false;
  }
  return true;
}

std::vector<OnsetEvent> PeakPicker::poll(bool final) {
  std::vector<OnsetEvent> out;
  const std::size_t n = values_.size();
  const std::size_t lookahead = std::max(kMaxRadius, kMedianFuture);
  while (next_ < n && (final || next_ + lookahead < n)) {
    const std::size_t i = next_++;
    if (is_onset(i, n)) {
      last_onset_ = i;
      out.push_back({static_cast<double>(i * hop_) / sample_rate_, values_[i], i});
    }
  }
  return out;
}

std::vector<OnsetEvent> pick_onsets(const OnsetCurve& curve, const OnsetParams& params,
                                    std::span<const double> frame_levels_db) {
  if (curve.values.empty()) throw Error(ErrorKind::kInvalidArgument, "empty onset curve");
  if (!frame_levels_db.empty() && frame_levels_db.size() != curve.values.size())
    throw Error(ErrorKind::kInvalidArgument, "level count differs from curve length");
  PeakPicker picker(params, curve.hop, curve.sample_rate);
  for (std::size_t i = 0; i < curve.values.size(); ++i)
    picker.push(curve.values[i], frame_levels_db.empty()
                                     ? std::numeric_limits<double>::infinity()
                                     : frame_levels_db[i]);
  return picker.poll(true);
}

std::vector<OnsetEvent> detect_onsets(const AudioClip& clip, const OnsetParams& params,
                                      std::size_t window_size, std::size_t hop) {
  params.validate();
  const auto fr = frames(clip, window_size, hop);
  const OnsetCurve curve = params.method == OnsetMethod::kHfc
                               ? odf_hfc(fr, hop, clip.sample_rate())
                               : odf_spectral_flux(fr, hop, clip.sample_rate());
  std::vector<double> levels;
  levels.reserve(fr.size());
  for (const auto& f : fr) levels.push_back(f.level_db);
  return pick_onsets(curve, params, levels);
}

}  // namespace beatvox
