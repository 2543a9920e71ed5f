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

#ifndef BEATVOX_CORE_AUDIO_HPP_
#define BEATVOX_CORE_AUDIO_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace beatvox {

inline constexpr int kCanonicalSampleRate = 44100;
inline constexpr std::size_t kDefaultWindowSize = 1024;
inline constexpr std::size_t kDefaultHop = 512;

// Mono sample buffer. Immutable once built; safe to share between readers.
// Synthetic clips additionally carry the onset times they were built with.
class AudioClip {
 public:
  AudioClip(std::vector<double> samples, int sample_rate,
            std::vector<double> true_onsets = {});

  std::span<const double> samples() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }
  const std::vector<double>& true_onsets() const { return true_onsets_; }

 private:
  std::vector<double> samples_;
  int sample_rate_;
  std::vector<double> true_onsets_;
};

struct Frame {
  std::size_t index = 0;
  std::size_t start_sample = 0;
  std::vector<double> windowed;
  std::vector<double> magnitude_spectrum;  // |X[b]|, b in [0, N/2]
  std::vector<double> power_spectrum;      // |X[b]|^2 / N
  double level_db = 0.0;                   // RMS of the unwindowed frame
};

// Reads a RIFF/WAVE file (PCM 16/24-bit, float 32-bit; mono or stereo),
// downmixes to mono and resamples linearly to target_sr.
AudioClip load_audio(const std::string& path,
                     int target_sr = kCanonicalSampleRate);
AudioClip decode_wav(std::span<const std::uint8_t> bytes,
                     int target_sr = kCanonicalSampleRate);

// 16-bit PCM mono encoding, samples clipped to [-1, 1].
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);
void save_wav(const AudioClip& clip, const std::string& path);

std::vector<double> resample_linear(std::span<const double> samples,
                                    int source_sr, int target_sr);

// Periodic Hann window of the given length.
const std::vector<double>& hann_window(std::size_t size);

// Analyses the frame starting at `start` within `samples`; samples past the
// end of the span read as zero.
Frame analyze_frame(std::span<const double> samples, std::size_t index,
                    std::size_t start, std::size_t window_size);

std::size_t frame_count(std::size_t num_samples, std::size_t hop);

std::vector<Frame> frames(const AudioClip& clip,
                          std::size_t window_size = kDefaultWindowSize,
                          std::size_t hop = kDefaultHop);

void check_framing(std::size_t window_size, std::size_t hop);

}  // namespace beatvox

#endif  // BEATVOX_CORE_AUDIO_HPP_
