#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xmg/errors.hpp"

namespace xmg {

struct TempoEntry {
  std::int64_t tick = 0;
  std::int64_t us_per_quarter = 500000;
};

/// Piecewise-constant tempo map resolving ticks to absolute milliseconds.
/// An implicit (0, 500000) entry applies when no tempo is set at tick 0.
class TempoMap {
public:
  TempoMap() : TempoMap({}, 480) {}
  TempoMap(std::vector<TempoEntry> entries, int ppq);

  double tick_to_ms(std::int64_t tick) const;
  int ppq() const { return ppq_; }
  const std::vector<TempoEntry>& entries() const { return entries_; }

private:
  std::vector<TempoEntry> entries_;
  std::vector<double> cumulative_ms_;  // ms at entries_[i].tick
  int ppq_;
};

/// A performance note in absolute time. `pedal_on` is the sustain-pedal
/// (controller 64, value >= 64) state sampled at the note's onset.
struct NoteEvent {
  int pitch = 60;            // [0,127]
  double onset_ms = 0.0;     // >= 0
  double duration_ms = 1.0;  // > 0
  int velocity = 64;         // [1,127]; a velocity-0 note-on is a note-off
  bool pedal_on = false;

  bool operator==(const NoteEvent&) const = default;
};

struct SmfParseResult {
  std::vector<NoteEvent> notes;  // sorted by onset; file order on equal onsets
  TempoMap tempo_map;
  // Set when a note-on had no matching note-off and was closed at the end
  // of its track.
  bool dangling_note_warning = false;
};

/// Parses a format 0/1 Standard MIDI File. Note-on/off pairs are matched
/// FIFO per (channel, pitch); running status is honored; events sharing a
/// tick apply in file order, so a controller-64 change just before a note-on
/// decides that note's pedal flag. Unknown meta/sysex events are skipped.
/// Throws ParseError (with byte offset) on malformed input.
/// Pure function over its input; safe to call concurrently on different
/// files.
SmfParseResult parse_smf(std::span<const std::uint8_t> bytes);

/// Writes a single-track format 0 file at a fixed 500000 us/quarter tempo.
/// Notes must be sorted by onset (ties are reordered by ascending pitch);
/// pedal transitions between consecutive notes emit a controller-64 event
/// immediately before the triggering note-on. Milliseconds are rounded to
/// the nearest tick, so a reparse reproduces times within half a tick.
std::vector<std::uint8_t> write_smf(std::span<const NoteEvent> notes, int ppq = 480);

}  // namespace xmg
