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

#include "midi.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <set>

#include "error.hpp"

namespace beatvox {

void MidiMapping::validate() const {
  std::set<int> used;
  for (const auto& [name, note] : notes) {
    if (note < 0 || note > 127)
      throw Error(ErrorKind::kInvalidArgument, "note for '" + name + "' outside [0, 127]");
    if (!used.insert(note).second)
      throw Error(ErrorKind::kInvalidArgument, "note " + std::to_string(note) + " mapped twice");
  }
  if (channel < 1 || channel > 16)
    throw Error(ErrorKind::kInvalidArgument, "MIDI channel must be in [1, 16]");
  if (!(note_duration > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "note duration must be positive");
}

std::string MidiMapping::label_for(int note) const {
  for (const auto& [name, n] : notes)
    if (n == note) return name;
  return "note_" + std::to_string(note);
}

MidiMapping parse_midi_mapping(std::string_view text) {
  MidiMapping m;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const auto colon = item.find(':');
    int note = -1;
    if (colon != std::string_view::npos) {
      const auto digits = item.substr(colon + 1);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), note);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) note = -1;
    }
    if (colon == std::string_view::npos || colon == 0 || note < 0)
      throw Error(ErrorKind::kInvalidArgument,
                  "mapping item '" + std::string(item) + "' is not name:note");
    m.notes[std::string(item.substr(0, colon))] = note;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Variable-length quantities

void write_vlq(std::vector<std::uint8_t>& out, std::uint32_t value) {
  if (value > kMaxVlq) throw Error(ErrorKind::kInvalidArgument, "value too large for a VLQ");
  std::uint8_t groups[4];
  int n = 0;
  do {
    groups[n++] = static_cast<std::uint8_t>(value & 0x7F);
    value >>= 7;
  } while (value != 0);
  while (n-- > 1) out.push_back(groups[n] | 0x80);
  out.push_back(groups[0]);
}

std::uint32_t read_vlq(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) {
    if (pos >= bytes.size()) throw Error(ErrorKind::kFormat, "truncated variable-length value");
    const std::uint8_t b = bytes[pos++];
    value = (value << 7) | (b & 0x7F);
    if (!(b & 0x80)) return value;
  }
  throw Error(ErrorKind::kFormat, "variable-length value longer than 4 bytes");
}

// ---------------------------------------------------------------------------
// Writing

namespace {

void put_be(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// Uses the tempo as stored in the file (whole microseconds per quarter) so
// that a reader recovers each time within half a tick.
std::uint32_t to_tick(double seconds, std::uint32_t us_per_quarter, int ppq) {
  const double ticks = std::round(seconds * 1e6 / us_per_quarter * ppq);
  if (!(ticks >= 0.0) || ticks > static_cast<double>(kMaxVlq))
    throw Error(ErrorKind::kInvalidArgument, "event time does not fit the MIDI tick range");
  return static_cast<std::uint32_t>(ticks);
}

struct TrackMessage {
  std::uint32_t tick;
  int order;  // note-offs sort before note-ons on the same tick
  std::size_t seq;
  std::uint8_t status, data1, data2;
};

}  // namespace

std::vector<std::uint8_t> write_smf(const Transcription& t, const MidiMapping& mapping,
                                    double tempo_bpm, int ppq) {
  mapping.validate();
  if (!(tempo_bpm > 0.0) || !std::isfinite(tempo_bpm))
    throw Error(ErrorKind::kInvalidArgument, "tempo must be positive");
  if (ppq <= 0 || ppq > 0x7FFF)
    throw Error(ErrorKind::kInvalidArgument, "ppq must be in [1, 32767]");

  const long long us = std::llround(60'000'000.0 / tempo_bpm);
  if (us <= 0 || us > 0xFFFFFF) throw Error(ErrorKind::kInvalidArgument, "tempo out of range");
  const auto us_per_quarter = static_cast<std::uint32_t>(us);

  const auto ch = static_cast<std::uint8_t>(mapping.channel - 1);
  std::vector<TrackMessage> msgs;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const auto& ev = t.events[i];
    const auto it = mapping.notes.find(ev.label);
    if (it == mapping.notes.end())
      throw Error(ErrorKind::kInvalidArgument, "no MIDI note mapped for label '" + ev.label + "'");
    if (!(ev.time >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "negative event time");
    const auto note = static_cast<std::uint8_t>(it->second);
    const std::uint32_t on = to_tick(ev.time, us_per_quarter, ppq);
    std::uint32_t off = std::max(on + 1, to_tick(ev.time + mapping.note_duration, us_per_quarter, ppq));
    // A retrigger of the same note cuts the previous one short.
    for (std::size_t j = i + 1; j < t.events.size(); ++j) {
      if (t.events[j].label != ev.label) continue;
      off = std::min(off, std::max(on + 1, to_tick(t.events[j].time, us_per_quarter, ppq)));
      break;
    }
    if (off > kMaxVlq) throw Error(ErrorKind::kInvalidArgument, "tick overflow");
    const auto vel = static_cast<std::uint8_t>(std::clamp(ev.velocity, 1, 127));
    msgs.push_back({on, 1, i, static_cast<std::uint8_t>(0x90 | ch), note, vel});
    msgs.push_back({off, 0, i, static_cast<std::uint8_t>(0x80 | ch), note, 0x40});
  }
  std::stable_sort(msgs.begin(), msgs.end(), [](const TrackMessage& a, const TrackMessage& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.order != b.order) return a.order < b.order;
    return a.seq < b.seq;
  });

  std::vector<std::uint8_t> track;
  write_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x51, 0x03});
  put_be(track, us_per_quarter, 3);
  std::uint32_t last = 0;
  for (const auto& m : msgs) {
    write_vlq(track, m.tick - last);
    last = m.tick;
    track.insert(track.end(), {m.status, m.data1, m.data2});
  }
  write_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'M', 'T', 'h', 'd'});
  put_be(out, 6, 4);
  put_be(out, 0, 2);  // format 0
  put_be(out, 1, 2);
  put_be(out, static_cast<std::uint32_t>(ppq), 2);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_be(out, static_cast<std::uint32_t>(track.size()), 4);
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

// ---------------------------------------------------------------------------
// Reading

namespace {

std::uint32_t get_be(std::span<const std::uint8_t> b, std::size_t pos, int bytes) {
  std::uint32_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | b[pos + i];
  return v;
}

struct RawNote {
  std::uint64_t tick;
  std::size_t track;
  std::size_t seq;
  int note, velocity, channel;
};

struct TempoChange {
  std::uint64_t tick;
  std::uint32_t us_per_quarter;
};

void parse_track(std::span<const std::uint8_t> trk, std::size_t track_index,
                 std::vector<RawNote>& notes, std::vector<TempoChange>& tempos) {
  std::size_t pos = 0;
  std::uint64_t tick = 0;
  std::uint8_t running = 0;
  std::size_t seq = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > trk.size()) throw Error(ErrorKind::kFormat, "truncated track");
  };
  while (pos < trk.size()) {
    tick += read_vlq(trk, pos);
    need(1);
    std::uint8_t status = trk[pos];
    if (status & 0x80) {
      ++pos;
    } else {
      if (running == 0) throw Error(ErrorKind::kFormat, "data byte without running status");
      status = running;
    }
    if (status == 0xFF) {
      need(1);
      const std::uint8_t type = trk[pos++];
      const std::uint32_t len = read_vlq(trk, pos);
      need(len);
      if (type == 0x51) {
        if (len != 3) throw Error(ErrorKind::kFormat, "bad tempo event");
        tempos.push_back({tick, get_be(trk, pos, 3)});
      }
      pos += len;
      if (type == 0x2F) return;
      running = 0;
    } else if (status == 0xF0 || status == 0xF7) {
      const std::uint32_t len = read_vlq(trk, pos);
      need(len);
      pos += len;
      running = 0;
    } else if (status >= 0xF0) {
      throw Error(ErrorKind::kFormat, "unexpected system message in track");
    } else {
      running = status;
      const std::uint8_t kind = status & 0xF0;
      const std::size_t data_len = (kind == 0xC0 || kind == 0xD0) ? 1 : 2;
      need(data_len);
      if (kind == 0x90 && trk[pos + 1] > 0)
        notes.push_back({tick, track_index, seq++, trk[pos] & 0x7F, trk[pos + 1] & 0x7F,
                         (status & 0x0F) + 1});
      pos += data_len;
    }
  }
  throw Error(ErrorKind::kFormat, "track ends without end-of-track event");
}

}  // namespace

std::vector<MidiNote> read_smf_notes(std::span<const std::uint8_t> bytes,
                                     const MidiMapping& mapping) {
  if (bytes.size() < 14 || std::memcmp(bytes.data(), "MThd", 4) != 0)
    throw Error(ErrorKind::kFormat, "bad MIDI header");
  const std::uint32_t header_len = get_be(bytes, 4, 4);
  if (header_len < 6 || 8 + std::size_t(header_len) > bytes.size())
    throw Error(ErrorKind::kFormat, "bad MIDI header length");
  const std::uint32_t format = get_be(bytes, 8, 2);
  const std::uint32_t ntracks = get_be(bytes, 10, 2);
  const std::uint32_t division = get_be(bytes, 12, 2);
  if (format > 1) throw Error(ErrorKind::kFormat, "unsupported SMF format " + std::to_string(format));
  if (division & 0x8000) throw Error(ErrorKind::kFormat, "SMPTE time division not supported");
  if (division == 0) throw Error(ErrorKind::kFormat, "zero ticks per quarter note");

  std::vector<RawNote> notes;
  std::vector<TempoChange> tempos;
  std::size_t pos = 8 + header_len;
  std::size_t found = 0;
  while (found < ntracks) {
    if (pos + 8 > bytes.size()) throw Error(ErrorKind::kFormat, "truncated file: missing track");
    const std::uint32_t len = get_be(bytes, pos + 4, 4);
    if (pos + 8 + std::size_t(len) > bytes.size())
      throw Error(ErrorKind::kFormat, "truncated track chunk");
    if (std::memcmp(bytes.data() + pos, "MTrk", 4) == 0)
      parse_track(bytes.subspan(pos + 8, len), found++, notes, tempos);
    else if (!std::isalpha(bytes[pos]))  // foreign chunks are skipped, garbage is not
      throw Error(ErrorKind::kFormat, "malformed chunk");
    pos += 8 + len;
  }

  std::stable_sort(tempos.begin(), tempos.end(),
                   [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });
  std::stable_sort(notes.begin(), notes.end(), [](const RawNote& a, const RawNote& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.track != b.track) return a.track < b.track;
    return a.seq < b.seq;
  });

  // Walk the tempo map alongside the sorted notes.
  std::vector<MidiNote> out;
  double seconds_at_anchor = 0.0;
  std::uint64_t anchor_tick = 0;
  std::uint32_t tempo = 500000;
  std::size_t ti = 0;
  const double ppq = division;
  for (const auto& n : notes) {
    while (ti < tempos.size() && tempos[ti].tick <= n.tick) {
      seconds_at_anchor += double(tempos[ti].tick - anchor_tick) * tempo / (ppq * 1e6);
      anchor_tick = tempos[ti].tick;
      tempo = tempos[ti].us_per_quarter;
      ++ti;
    }
    const double t = seconds_at_anchor + double(n.tick - anchor_tick) * tempo / (ppq * 1e6);
    out.push_back({t, n.note, n.velocity, n.channel, mapping.label_for(n.note)});
  }
  return out;
}

Transcription read_smf(std::span<const std::uint8_t> bytes, const MidiMapping& mapping) {
  Transcription t;
  for (const auto& n : read_smf_notes(bytes, mapping)) {
    t.events.push_back({n.time, n.label, n.velocity});
    t.duration = std::max(t.duration, n.time);
  }
  return t;
}

}  // namespace beatvox
