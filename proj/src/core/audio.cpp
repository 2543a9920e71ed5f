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

#include "audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "error.hpp"
#include "fft.hpp"

namespace beatvox {

AudioClip::AudioClip(std::vector<double> samples, int sample_rate,
                     std::vector<double> true_onsets)
    : samples_(std::move(samples)),
      sample_rate_(sample_rate),
      true_onsets_(std::move(true_onsets)) {
  if (sample_rate_ <= 0)
    throw Error(ErrorKind::kInvalidArgument, "sample rate must be positive");
  for (double x : samples_)
    if (!std::isfinite(x))
      throw Error(ErrorKind::kInvalidArgument, "audio contains non-finite samples");
}

// ---------------------------------------------------------------------------
// WAV decoding

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

double decode_sample(const std::uint8_t* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    float f;
    std::uint32_t u = read_u32(p);
    std::memcpy(&f, &u, sizeof f);
    return static_cast<double>(f);
  }
  if (bits == 16) {
    auto v = static_cast<std::int16_t>(read_u16(p));
    return v / 32768.0;
  }
  // 24-bit, sign-extended through the top byte.
  std::int32_t v = std::int32_t(p[0]) | (std::int32_t(p[1]) << 8) |
                   (std::int32_t(static_cast<std::int8_t>(p[2])) << 16);
  return v / 8388608.0;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes, int target_sr) {
  if (target_sr <= 0)
    throw Error(ErrorKind::kInvalidArgument, "target sample rate must be positive");
  const std::uint8_t* data = bytes.data();
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0)
    throw Error(ErrorKind::kFormat, "not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* pcm = nullptr;
  std::size_t pcm_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint8_t* chunk = data + pos;
    std::size_t chunk_size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + chunk_size > size)
        throw Error(ErrorKind::kFormat, "truncated fmt chunk");
      format = read_u16(data + body);
      channels = read_u16(data + body + 2);
      rate = read_u32(data + body + 4);
      bits = read_u16(data + body + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40) throw Error(ErrorKind::kFormat, "truncated extensible fmt chunk");
        format = read_u16(data + body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      // Streaming writers leave the size as 0 or 0xFFFFFFFF; take what is there.
      if (chunk_size == 0 || body + chunk_size > size) chunk_size = size - body;
      pcm = data + body;
      pcm_size = chunk_size;
      break;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt) throw Error(ErrorKind::kFormat, "missing fmt chunk");
  if (pcm == nullptr) throw Error(ErrorKind::kFormat, "missing data chunk");
  const bool supported = (format == kFormatPcm && (bits == 16 || bits == 24)) ||
                         (format == kFormatFloat && bits == 32);
  if (!supported)
    throw Error(ErrorKind::kFormat, "unsupported WAV encoding (format " +
                                        std::to_string(format) + ", " +
                                        std::to_string(bits) + " bits)");
  if (channels != 1 && channels != 2)
    throw Error(ErrorKind::kFormat, "unsupported channel count " + std::to_string(channels));
  if (rate == 0) throw Error(ErrorKind::kFormat, "zero sample rate");

  const std::size_t frame_bytes = std::size_t(channels) * (bits / 8);
  const std::size_t n = pcm_size / frame_bytes;
  if (n == 0) throw Error(ErrorKind::kFormat, "zero-length audio");

  std::vector<double> mono(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = pcm + i * frame_bytes;
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) acc += decode_sample(p + c * (bits / 8), format, bits);
    mono[i] = std::clamp(acc / channels, -1.0, 1.0);
  }
  if (static_cast<int>(rate) != target_sr)
    mono = resample_linear(mono, static_cast<int>(rate), target_sr);
  return AudioClip(std::move(mono), target_sr);
}

AudioClip load_audio(const std::string& path, int target_sr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, target_sr);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  const std::uint32_t n = static_cast<std::uint32_t>(clip.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * std::size_t(n));
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, 2 * n);
  for (double x : clip.samples()) {
    const double scaled = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void save_wav(const AudioClip& clip, const std::string& path) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path);
}

std::vector<double> resample_linear(std::span<const double> samples,
                                    int source_sr, int target_sr) {
  if (source_sr <= 0 || target_sr <= 0)
    throw Error(ErrorKind::kInvalidArgument, "sample rates must be positive");
  if (samples.empty() || source_sr == target_sr)
    return {samples.begin(), samples.end()};
  const double ratio = static_cast<double>(source_sr) / target_sr;
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(samples.size()) * target_sr / source_sr));
  std::vector<double> out(std::max<std::size_t>(out_len, 1));
  const std::size_t last = samples.size() - 1;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double pos = static_cast<double>(j) * ratio;
    const auto i0 = std::min(static_cast<std::size_t>(pos), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = pos - static_cast<double>(i0);
    const double a = samples[i0];
    const double b = samples[i1];
    out[j] = a == b ? a : a + (b - a) * std::min(frac, 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Framing

const std::vector<double>& hann_window(std::size_t size) {
  static std::mutex mutex;
  static std::map<std::size_t, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& w = cache[size];
  if (w.size() != size) {
    w.resize(size);
    for (std::size_t n = 0; n < size; ++n)
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / size);
  }
  return w;
}

void check_framing(std::size_t window_size, std::size_t hop) {
  if (window_size < 2 || !std::has_single_bit(window_size))
    throw Error(ErrorKind::kInvalidArgument, "window size must be a power of two");
  if (hop == 0 || hop > window_size)
    throw Error(ErrorKind::kInvalidArgument, "hop must be in (0, window_size]");
}

std::size_t frame_count(std::size_t num_samples, std::size_t hop) {
  return (num_samples + hop - 1) / hop;
}

Frame analyze_frame(std::span<const double> samples, std::size_t index,
                    std::size_t start, std::size_t window_size) {
  const auto& window = hann_window(window_size);
  Frame f;
  f.index = index;
  f.start_sample = start;
  f.windowed.assign(window_size, 0.0);
  double energy = 0.0;
  for (std::size_t n = 0; n < window_size && start + n < samples.size(); ++n) {
    const double x = samples[start + n];
    energy += x * x;
    f.windowed[n] = x * window[n];
  }
  const double rms = std::sqrt(energy / window_size);
  f.level_db = rms > 0.0 ? 20.0 * std::log10(rms) : -std::numeric_limits<double>::infinity();

  const auto bins = real_dft(f.windowed);
  f.magnitude_spectrum.resize(bins.size());
  f.power_spectrum.resize(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const double mag = std::abs(bins[b]);
    f.magnitude_spectrum[b] = mag;
    f.power_spectrum[b] = std::norm(bins[b]) / static_cast<double>(window_size);
  }
  return f;
}

std::vector<Frame> frames(const AudioClip& clip, std::size_t window_size,
                          std::size_t hop) {
  check_framing(window_size, hop);
  if (clip.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot frame an empty clip");
  const std::size_t count = frame_count(clip.size(), hop);
  std::vector<Frame> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(analyze_frame(clip.samples(), i, i * hop, window_size));
  return out;
}

}  // namespace beatvox
