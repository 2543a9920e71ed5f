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

#include "live.hpp"

#include "error.hpp"
#include "features.hpp"

namespace beatvox {
namespace {

std::shared_ptr<const UserModel> checked(std::shared_ptr<const UserModel> model) {
  if (!model) throw Error(ErrorKind::kInvalidArgument, "no model");
  model->validate();
  return model;
}

}  // namespace

LiveTranscriber::LiveTranscriber(std::shared_ptr<const UserModel> model)
    : model_(checked(std::move(model))),
      classifier_(*model_),
      picker_(model_->onset_params, model_->feature_config.hop, model_->sample_rate) {}

std::vector<DrumEvent> LiveTranscriber::push(std::span<const double> samples) {
  if (finished_) throw Error(ErrorKind::kState, "stream already finished");
  samples_.insert(samples_.end(), samples.begin(), samples.end());
  return advance(false);
}

std::vector<DrumEvent> LiveTranscriber::finish() {
  if (finished_) throw Error(ErrorKind::kState, "stream already finished");
  auto out = advance(true);
  finished_ = true;
  return out;
}

std::vector<DrumEvent> LiveTranscriber::advance(bool final) {
  const auto& fc = model_->feature_config;
  const std::size_t have = samples_.size();
  const std::size_t total_frames = frame_count(have, fc.hop);
  while (final ? next_frame_ < total_frames
               : next_frame_ * fc.hop + fc.window_size <= have) {
    const std::size_t i = next_frame_++;
    Frame f = analyze_frame(samples_, i, i * fc.hop, fc.window_size);
    const double value = model_->onset_params.method == OnsetMethod::kHfc
                             ? hfc_value(f.magnitude_spectrum)
                             : flux_value(f.magnitude_spectrum, prev_magnitude_);
    prev_magnitude_ = std::move(f.magnitude_spectrum);
    picker_.push(value, f.level_db);
  }
  // An empty stream has no frames; the offline path treats it as silence.
  if (picker_.frames_seen() > 0)
    for (const auto& onset : picker_.poll(final)) pending_.push_back(onset);

  std::vector<DrumEvent> out;
  while (!pending_.empty()) {
    const EventSpan span = event_span(pending_.front().time, model_->sample_rate, fc);
    if (!final && span.end > have) break;
    out.push_back(classifier_.classify(samples_, pending_.front().time));
    pending_.pop_front();
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_chunk(const StreamChunk& chunk) {
  std::vector<std::uint8_t> out;
  const auto len = static_cast<std::uint32_t>(chunk.pcm.size() * 2);
  out.reserve(kChunkHeaderSize + len);
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(chunk.sequence >> s));
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  out.push_back(chunk.final ? 1 : 0);
  for (std::int16_t v : chunk.pcm) {
    const auto u = static_cast<std::uint16_t>(v);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

std::vector<StreamChunk> ChunkDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  std::vector<StreamChunk> out;
  std::size_t pos = 0;
  auto be32 = [this](std::size_t at) {
    return (std::uint32_t(buffer_[at]) << 24) | (std::uint32_t(buffer_[at + 1]) << 16) |
           (std::uint32_t(buffer_[at + 2]) << 8) | std::uint32_t(buffer_[at + 3]);
  };
  while (buffer_.size() - pos >= kChunkHeaderSize) {
    const std::uint32_t seq = be32(pos);
    const std::uint32_t len = be32(pos + 4);
    const std::uint8_t flag = buffer_[pos + 8];
    if (len % 2 != 0)
      throw Error(ErrorKind::kFormat, "chunk payload length must be even");
    if (flag > 1) throw Error(ErrorKind::kFormat, "chunk final flag must be 0 or 1");
    if (seq != next_sequence_)
      throw Error(ErrorKind::kFormat, "chunk sequence " + std::to_string(seq) +
                                          ", expected " + std::to_string(next_sequence_));
    if (buffer_.size() - pos - kChunkHeaderSize < len) break;
    StreamChunk c;
    c.sequence = seq;
    c.final = flag == 1;
    c.pcm.resize(len / 2);
    const std::size_t body = pos + kChunkHeaderSize;
    for (std::size_t i = 0; i < c.pcm.size(); ++i)
      c.pcm[i] = static_cast<std::int16_t>(
          static_cast<std::uint16_t>(buffer_[body + 2 * i] | (buffer_[body + 2 * i + 1] << 8)));
    pos = body + len;
    ++next_sequence_;
    out.push_back(std::move(c));
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
  return out;
}

std::vector<double> pcm16_to_samples(std::span<const std::int16_t> pcm) {
  std::vector<double> out(pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) out[i] = pcm[i] / 32768.0;
  return out;
}

}  // namespace beatvox
