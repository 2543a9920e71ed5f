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

#ifndef BEATVOX_CORE_SYNTH_HPP_
#define BEATVOX_CORE_SYNTH_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "audio.hpp"

namespace beatvox {

// Deterministic test-signal generator. A signal is a mix of sources placed
// at absolute times over an optional background noise floor; the generated
// clip records the start time of every non-silent source as ground truth.

enum class SourceKind { kSine, kNoise, kClick };

struct Envelope {
  double attack = 0.001;   // linear ramp-in, seconds
  double decay = 0.0;      // exponential time constant, seconds; 0 = sustained
  double release = 0.005;  // raised-cosine fade-out, seconds
};

struct SynthSource {
  SourceKind kind = SourceKind::kClick;
  double time = 0.0;       // start, seconds
  double duration = 0.0;   // ignored for clicks
  double amplitude = 1.0;  // peak amplitude
  double frequency = 0.0;  // sine only
  std::uint64_t seed = 0;  // noise only
  double band_low = 0.0;   // noise pass band, Hz; band_high 0 = up to Nyquist
  double band_high = 0.0;
  Envelope envelope;
};

struct SynthSpec {
  int sample_rate = kCanonicalSampleRate;
  double min_duration = 0.0;
  double noise_floor_rms = 0.0;
  std::uint64_t noise_floor_seed = 0;
  std::vector<SynthSource> sources;
};

AudioClip synth_signal(const SynthSpec& spec);

// Text form, statements separated by ';' or newlines:
//   rate SR
//   silence DUR
//   sine FREQ DUR AMP [@T] [attack=S] [decay=S] [release=S]
//   noise DUR AMP [seed=N] [band=LO:HI] [@T] [attack=S] [decay=S] [release=S]
//   click [@T] [amp=A]
//   clicks T1,T2,...
//   floor RMS [seed=N]
// Sources without @T start where the previous statement ended, so a
// sequence of statements concatenates; explicit times mix.
SynthSpec parse_synth_spec(std::string_view text);

// Convenience constructors.
SynthSpec silence(double duration, int sample_rate = kCanonicalSampleRate);
SynthSpec click_track(const std::vector<double>& times, double duration = 0.0);
SynthSource sine_burst(double time, double frequency, double duration,
                       double amplitude);
SynthSource noise_burst(double time, double duration, double amplitude,
                        std::uint64_t seed, double band_low = 0.0,
                        double band_high = 0.0);

}  // namespace beatvox

#endif  // BEATVOX_CORE_SYNTH_HPP_
