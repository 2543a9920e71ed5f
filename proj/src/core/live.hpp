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

#ifndef BEATVOX_CORE_LIVE_HPP_
#define BEATVOX_CORE_LIVE_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "onset.hpp"
#include "pipeline.hpp"

namespace beatvox {

// Incremental transcriber. Frames are analysed as soon as their window is
// complete, onsets are decided with the picker's fixed lookahead and events
// are classified once their analysis span has arrived. Closing the stream
// zero-pads the tail exactly like the offline path, so the event list does
// not depend on how the signal was chunked.
class LiveTranscriber {
 public:
  explicit LiveTranscriber(std::shared_ptr<const UserModel> model);

  std::vector<DrumEvent> push(std::span<const double> samples);
  std::vector<DrumEvent> finish();

  bool finished() const { return finished_; }
  std::size_t samples_received() const { return samples_.size(); }

 private:
  std::vector<DrumEvent> advance(bool final);

  std::shared_ptr<const UserModel> model_;
  EventClassifier classifier_;
  PeakPicker picker_;
  std::vector<double> samples_;
  std::vector<double> prev_magnitude_;
  std::size_t next_frame_ = 0;
  std::deque<OnsetEvent> pending_;
  bool finished_ = false;
};

// Binary stream chunk: 4-byte sequence, 4-byte payload length, 1-byte final
// flag (all big-endian), then signed 16-bit little-endian mono PCM.
struct StreamChunk {
  std::uint32_t sequence = 0;
  std::vector<std::int16_t> pcm;
  bool final = false;
};

inline constexpr std::size_t kChunkHeaderSize = 9;

std::vector<std::uint8_t> encode_chunk(const StreamChunk& chunk);

// Accumulates bytes and yields complete chunks, enforcing contiguous
// sequence numbers starting at 0.
class ChunkDecoder {
 public:
  std::vector<StreamChunk> feed(std::span<const std::uint8_t> bytes);
  std::uint32_t next_sequence() const { return next_sequence_; }
  bool has_partial() const { return !buffer_.empty(); }

 private:
  std::vector<std::uint8_t> buffer_;
  std::uint32_t next_sequence_ = 0;
};

std::vector<double> pcm16_to_samples(std::span<const std::int16_t> pcm);

}  // namespace beatvox

#endif  // BEATVOX_CORE_LIVE_HPP_
