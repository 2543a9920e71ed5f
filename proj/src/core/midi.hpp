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

#ifndef BEATVOX_CORE_MIDI_HPP_
#define BEATVOX_CORE_MIDI_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pipeline.hpp"

namespace beatvox {

struct MidiMapping {
  std::map<std::string, int> notes = {{"kick", 36}, {"snare", 38}, {"hihat", 42}};
  int channel = 10;             // 1-based; wire value is channel - 1
  double note_duration = 0.1;   // seconds

  void validate() const;
  std::string label_for(int note) const;  // "note_<n>" when unmapped
};

// "name:note[,name:note...]" merged over the defaults.
MidiMapping parse_midi_mapping(std::string_view text);

inline constexpr std::uint32_t kMaxVlq = 0x0FFFFFFF;

void write_vlq(std::vector<std::uint8_t>& out, std::uint32_t value);
// Decodes at `pos` and advances it; throws on truncation or overlong input.
std::uint32_t read_vlq(std::span<const std::uint8_t> bytes, std::size_t& pos);

std::vector<std::uint8_t> write_smf(const Transcription& t, const MidiMapping& mapping = {},
                                    double tempo_bpm = 120.0, int ppq = 480);

struct MidiNote {
  double time = 0.0;
  int note = 0;
  int velocity = 0;
  int channel = 1;
  std::string label;
};

std::vector<MidiNote> read_smf_notes(std::span<const std::uint8_t> bytes,
                                     const MidiMapping& mapping = {});
Transcription read_smf(std::span<const std::uint8_t> bytes, const MidiMapping& mapping = {});

}  // namespace beatvox

#endif  // BEATVOX_CORE_MIDI_HPP_
