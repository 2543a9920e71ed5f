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

#include "synth.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "error.hpp"
#include "fft.hpp"

namespace beatvox {
namespace {

// Uniform in [-1, 1) from the raw 64-bit engine output, so the sequence is
// identical on every standard library.
class UniformNoise {
 public:
  explicit UniformNoise(std::uint64_t seed) : engine_(seed) {}
  double next() {
    const std::uint64_t bits = engine_() >> 11;
    return static_cast<double>(bits) * 0x1.0p-52 - 1.0;
  }

 private:
  std::mt19937_64 engine_;
};

std::size_t to_samples(double seconds, int sr) {
  return static_cast<std::size_t>(std::llround(seconds * sr));
}

double envelope_at(const Envelope& env, double t, double duration) {
  double g = 1.0;
  if (env.attack > 0.0 && t < env.attack) g *= t / env.attack;
  if (env.decay > 0.0) g *= std::exp(-t / env.decay);
  const double release = std::min(env.release, duration);
  if (release > 0.0 && t > duration - release) {
    const double r = (duration - t) / release;  // 1 -> 0 across the fade
    g *= 0.5 - 0.5 * std::cos(std::numbers::pi * std::clamp(r, 0.0, 1.0));
  }
  return g;
}

std::vector<double> band_noise(std::size_t n, std::uint64_t seed, double lo,
                               double hi, int sr) {
  UniformNoise rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.next();
  const double nyquist = sr / 2.0;
  if (hi <= 0.0 || hi > nyquist) hi = nyquist;
  if (lo > 0.0 || hi < nyquist) {
    const std::size_t padded = std::bit_ceil(std::max<std::size_t>(n, 2));
    x.resize(padded, 0.0);
    auto bins = real_dft(x);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const double f = static_cast<double>(b) * sr / padded;
      if (f < lo || f > hi) bins[b] = 0.0;
    }
    x = inverse_real_dft(bins, padded);
    x.resize(n);
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : x) v /= peak;
  return x;
}

void validate(const SynthSource& s, int sr) {
  if (s.time < 0.0 || !std::isfinite(s.time))
    throw Error(ErrorKind::kInvalidArgument, "source time must be non-negative");
  if (s.kind != SourceKind::kClick && !(s.duration > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "duration must be positive");
  if (s.kind == SourceKind::kSine && !(s.frequency > 0.0 && s.frequency < sr / 2.0))
    throw Error(ErrorKind::kInvalidArgument,
                "sine frequency must lie in (0, sample_rate/2)");
  if (s.kind == SourceKind::kNoise && s.band_high > 0.0 && s.band_high <= s.band_low)
    throw Error(ErrorKind::kInvalidArgument, "noise band is empty");
}

}  // namespace

AudioClip synth_signal(const SynthSpec& spec) {
  const int sr = spec.sample_rate;
  if (sr <= 0) throw Error(ErrorKind::kInvalidArgument, "sample rate must be positive");
  if (spec.min_duration < 0.0)
    throw Error(ErrorKind::kInvalidArgument, "duration must be non-negative");

  double end = spec.min_duration;
  for (const auto& s : spec.sources) {
    validate(s, sr);
    end = std::max(end, s.kind == SourceKind::kClick
                            ? s.time + 1.0 / sr
                            : s.time + s.duration);
  }
  if (!(end > 0.0)) throw Error(ErrorKind::kInvalidArgument, "duration must be positive");
  std::vector<double> out(std::max<std::size_t>(to_samples(end, sr), 1), 0.0);

  if (spec.noise_floor_rms > 0.0) {
    // Uniform noise on [-a, a] has RMS a/sqrt(3).
    UniformNoise rng(spec.noise_floor_seed);
    const double a = spec.noise_floor_rms * std::sqrt(3.0);
    for (double& v : out) v += a * rng.next();
  }

  std::vector<double> onsets;
  for (const auto& s : spec.sources) {
    const std::size_t start = to_samples(s.time, sr);
    onsets.push_back(static_cast<double>(start) / sr);
    if (s.kind == SourceKind::kClick) {
      if (start < out.size()) out[start] += s.amplitude;
      continue;
    }
    const std::size_t n = std::max<std::size_t>(to_samples(s.duration, sr), 1);
    std::vector<double> body;
    if (s.kind == SourceKind::kNoise) {
      body = band_noise(n, s.seed, s.band_low, s.band_high, sr);
    } else {
      body.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        body[i] = std::sin(2.0 * std::numbers::pi * s.frequency * i / sr);
    }
    for (std::size_t i = 0; i < n && start + i < out.size(); ++i) {
      const double t = static_cast<double>(i) / sr;
      out[start + i] += s.amplitude * envelope_at(s.envelope, t, s.duration) * body[i];
    }
  }
  for (double& v : out) v = std::clamp(v, -1.0, 1.0);
  std::sort(onsets.begin(), onsets.end());
  return AudioClip(std::move(out), sr, std::move(onsets));
}

SynthSpec silence(double duration, int sample_rate) {
  if (!(duration > 0.0)) throw Error(ErrorKind::kInvalidArgument, "duration must be positive");
  SynthSpec spec;
  spec.sample_rate = sample_rate;
  spec.min_duration = duration;
  return spec;
}

SynthSpec click_track(const std::vector<double>& times, double duration) {
  SynthSpec spec;
  spec.min_duration = duration;
  for (double t : times) {
    SynthSource s;
    s.kind = SourceKind::kClick;
    s.time = t;
    spec.sources.push_back(s);
  }
  return spec;
}

SynthSource sine_burst(double time, double frequency, double duration,
                       double amplitude) {
  SynthSource s;
  s.kind = SourceKind::kSine;
  s.time = time;
  s.frequency = frequency;
  s.duration = duration;
  s.amplitude = amplitude;
  return s;
}

SynthSource noise_burst(double time, double duration, double amplitude,
                        std::uint64_t seed, double band_low, double band_high) {
  SynthSource s;
  s.kind = SourceKind::kNoise;
  s.time = time;
  s.duration = duration;
  s.amplitude = amplitude;
  s.seed = seed;
  s.band_low = band_low;
  s.band_high = band_high;
  return s;
}

// ---------------------------------------------------------------------------
// Text form

namespace {

double parse_number(std::string_view tok, std::string_view what) {
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw Error(ErrorKind::kInvalidArgument,
                "synth: bad " + std::string(what) + " '" + std::string(tok) + "'");
  return v;
}

std::uint64_t parse_seed(std::string_view tok) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(ErrorKind::kInvalidArgument, "synth: bad seed '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string> split_statements(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ';' || c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

SynthSpec parse_synth_spec(std::string_view text) {
  SynthSpec spec;
  double cursor = 0.0;
  for (const auto& stmt : split_statements(text)) {
    std::istringstream in(stmt);
    std::string verb;
    if (!(in >> verb) || verb.starts_with('#')) continue;
    std::vector<std::string> positional;
    SynthSource src;
    std::optional<double> at;
    std::string tok;
    double amp_override = -1.0;
    while (in >> tok) {
      if (tok.starts_with('@')) {
        at = parse_number(std::string_view(tok).substr(1), "time");
      } else if (auto eq = tok.find('='); eq != std::string::npos) {
        const std::string key = tok.substr(0, eq);
        const std::string_view val = std::string_view(tok).substr(eq + 1);
        if (key == "seed") {
          src.seed = parse_seed(val);
        } else if (key == "band") {
          const auto colon = val.find(':');
          if (colon == std::string_view::npos)
            throw Error(ErrorKind::kInvalidArgument, "synth: band must be LO:HI");
          src.band_low = parse_number(val.substr(0, colon), "band");
          src.band_high = parse_number(val.substr(colon + 1), "band");
        } else if (key == "attack") {
          src.envelope.attack = parse_number(val, key);
        } else if (key == "decay") {
          src.envelope.decay = parse_number(val, key);
        } else if (key == "release") {
          src.envelope.release = parse_number(val, key);
        } else if (key == "amp") {
          amp_override = parse_number(val, key);
        } else {
          throw Error(ErrorKind::kInvalidArgument, "synth: unknown option '" + key + "'");
        }
      } else {
        positional.push_back(tok);
      }
    }
    auto need = [&](std::size_t n) {
      if (positional.size() != n)
        throw Error(ErrorKind::kInvalidArgument,
                    "synth: '" + verb + "' takes " + std::to_string(n) + " arguments");
    };
    if (verb == "rate") {
      need(1);
      spec.sample_rate = static_cast<int>(parse_number(positional[0], "rate"));
    } else if (verb == "silence") {
      need(1);
      const double d = parse_number(positional[0], "duration");
      if (!(d > 0.0)) throw Error(ErrorKind::kInvalidArgument, "duration must be positive");
      cursor = at.value_or(cursor) + d;
      spec.min_duration = std::max(spec.min_duration, cursor);
    } else if (verb == "floor") {
      need(1);
      spec.noise_floor_rms = parse_number(positional[0], "rms");
      spec.noise_floor_seed = src.seed;
    } else if (verb == "sine" || verb == "noise") {
      const bool sine = verb == "sine";
      need(sine ? 3 : 2);
      src.kind = sine ? SourceKind::kSine : SourceKind::kNoise;
      std::size_t p = 0;
      if (sine) src.frequency = parse_number(positional[p++], "frequency");
      src.duration = parse_number(positional[p++], "duration");
      src.amplitude = parse_number(positional[p++], "amplitude");
      src.time = at.value_or(cursor);
      cursor = src.time + src.duration;
      spec.sources.push_back(src);
    } else if (verb == "click") {
      need(0);
      src.kind = SourceKind::kClick;
      src.time = at.value_or(cursor);
      if (amp_override >= 0.0) src.amplitude = amp_override;
      cursor = src.time;
      spec.sources.push_back(src);
    } else if (verb == "clicks") {
      need(1);
      std::string_view list = positional[0];
      while (!list.empty()) {
        const auto comma = list.find(',');
        SynthSource c;
        c.kind = SourceKind::kClick;
        c.time = parse_number(list.substr(0, comma), "time");
        if (amp_override >= 0.0) c.amplitude = amp_override;
        cursor = std::max(cursor, c.time);
        spec.sources.push_back(c);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
      }
    } else {
      throw Error(ErrorKind::kInvalidArgument, "synth: unknown statement '" + verb + "'");
    }
  }
  return spec;
}

}  // namespace beatvox
