#include "xmg/midi_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <map>
#include <string>

namespace xmg {

namespace {

constexpr std::int64_t kDefaultTempo = 500000;  // us per quarter

double span_ms(std::int64_t delta_ticks, std::int64_t us_per_quarter, int ppq) {
  return static_cast<double>(delta_ticks) * static_cast<double>(us_per_quarter) /
         (static_cast<double>(ppq) * 1000.0);
}

}  // namespace

TempoMap::TempoMap(std::vector<TempoEntry> entries, int ppq) : entries_(std::move(entries)), ppq_(ppq) {
  if (ppq_ <= 0) throw ValidationError("TempoMap: ppq must be positive");
  if (entries_.empty() || entries_.front().tick > 0) {
    entries_.insert(entries_.begin(), TempoEntry{0, kDefaultTempo});
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].tick < 0) throw ValidationError("TempoMap: negative tick");
    if (entries_[i].us_per_quarter <= 0) throw ValidationError("TempoMap: tempo must be positive");
    if (i > 0 && entries_[i].tick <= entries_[i - 1].tick) {
      throw ValidationError("TempoMap: entries must be strictly ascending by tick");
    }
  }
  cumulative_ms_.resize(entries_.size());
  cumulative_ms_[0] = 0.0;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    cumulative_ms_[i] = cumulative_ms_[i - 1] + span_ms(entries_[i].tick - entries_[i - 1].tick,
                                                        entries_[i - 1].us_per_quarter, ppq_);
  }
}

double TempoMap::tick_to_ms(std::int64_t tick) const {
  if (tick < 0) throw ValidationError("tick_to_ms: negative tick");
  // Last entry with entry.tick <= tick.
  auto it = std::upper_bound(entries_.begin(), entries_.end(), tick,
                             [](std::int64_t t, const TempoEntry& e) { return t < e.tick; });
  std::size_t idx = static_cast<std::size_t>(it - entries_.begin()) - 1;
  return cumulative_ms_[idx] + span_ms(tick - entries_[idx].tick, entries_[idx].us_per_quarter, ppq_);
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

namespace {

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() {
    if (pos_ >= bytes_.size()) throw ParseError("unexpected end of file", pos_);
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (pos_ >= bytes_.size()) throw ParseError("unexpected end of file", pos_);
    return bytes_[pos_];
  }
  std::uint16_t u16be() { return static_cast<std::uint16_t>(u8() << 8 | u8()); }
  std::uint32_t u32be() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | u8();
    return v;
  }
  // Variable-length quantity, at most 4 bytes per the SMF spec.
  std::uint32_t vlq() {
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint8_t b = u8();
      value = value << 7 | (b & 0x7f);
      if ((b & 0x80) == 0) return value;
    }
    throw ParseError("variable-length quantity longer than 4 bytes", pos_);
  }
  void skip(std::size_t count) {
    if (count > remaining()) throw ParseError("chunk overruns end of file", pos_);
    pos_ += count;
  }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

enum class RawKind { NoteOn, NoteOff, Control };

struct RawEvent {
  std::int64_t tick = 0;
  int track = 0;
  std::int64_t order = 0;  // position within the track
  RawKind kind = RawKind::NoteOn;
  std::uint8_t channel = 0;
  std::uint8_t a = 0;  // pitch or controller number
  std::uint8_t b = 0;  // velocity or controller value
};

struct TrackData {
  std::vector<RawEvent> events;
  std::vector<TempoEntry> tempos;
  std::int64_t end_tick = 0;
};

TrackData parse_track(Reader& r, std::uint32_t length, int track_index) {
  TrackData out;
  const std::size_t track_end = r.pos() + length;
  if (length > r.remaining()) throw ParseError("track chunk length overruns file", r.pos());

  std::int64_t tick = 0;
  std::int64_t order = 0;
  std::uint8_t running_status = 0;
  bool ended = false;

  while (r.pos() < track_end && !ended) {
    tick += r.vlq();
    std::uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
    } else if (running_status & 0x80) {
      status = running_status;
    } else {
      throw ParseError("data byte without running status", r.pos());
    }

    if (status == 0xff) {  // meta
      running_status = 0;
      std::uint8_t type = r.u8();
      std::uint32_t len = r.vlq();
      if (type == 0x2f) {
        r.skip(len);
        ended = true;
      } else if (type == 0x51) {
        if (len != 3) throw ParseError("set-tempo meta event must carry 3 bytes", r.pos());
        std::int64_t tempo = 0;
        for (int i = 0; i < 3; ++i) tempo = tempo << 8 | r.u8();
        out.tempos.push_back({tick, tempo});
      } else {
        r.skip(len);
      }
    } else if (status == 0xf0 || status == 0xf7) {  // sysex
      running_status = 0;
      r.skip(r.vlq());
    } else {
      running_status = status;
      std::uint8_t hi = status & 0xf0;
      std::uint8_t channel = status & 0x0f;
      switch (hi) {
        case 0x80: {
          std::uint8_t pitch = r.u8(), vel = r.u8();
          (void)vel;
          out.events.push_back({tick, track_index, order++, RawKind::NoteOff, channel, pitch, 0});
          break;
        }
        case 0x90: {
          std::uint8_t pitch = r.u8(), vel = r.u8();
          RawKind kind = vel == 0 ? RawKind::NoteOff : RawKind::NoteOn;
          out.events.push_back({tick, track_index, order++, kind, channel, pitch, vel});
          break;
        }
        case 0xb0: {
          std::uint8_t controller = r.u8(), value = r.u8();
          if (controller == 64) {
            out.events.push_back({tick, track_index, order++, RawKind::Control, channel, controller, value});
          }
          break;
        }
        case 0xa0:
        case 0xe0:
          r.skip(2);
          break;
        case 0xc0:
        case 0xd0:
          r.skip(1);
          break;
        default:
          throw ParseError("unexpected status byte " + std::to_string(status), r.pos());
      }
    }
  }
  if (r.pos() > track_end) throw ParseError("track events overran declared chunk length", r.pos());
  r.skip(track_end - r.pos());
  out.end_tick = tick;
  return out;
}

}  // namespace

SmfParseResult parse_smf(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.remaining() < 14 || std::memcmp(bytes.data(), "MThd", 4) != 0) {
    throw ParseError("missing MThd header", 0);
  }
  r.skip(4);
  std::uint32_t header_len = r.u32be();
  if (header_len < 6) throw ParseError("MThd chunk too short", r.pos());
  std::uint16_t format = r.u16be();
  std::uint16_t ntrks = r.u16be();
  std::uint16_t division = r.u16be();
  r.skip(header_len - 6);
  if (format > 1) throw ParseError("only SMF format 0/1 supported", 8);
  if (division & 0x8000) throw ParseError("SMPTE time division not supported", 12);
  if (division == 0) throw ParseError("ppq must be positive", 12);
  const int ppq = division;

  std::vector<TrackData> tracks;
  while (tracks.size() < ntrks) {
    if (r.remaining() < 8) throw ParseError("fewer track chunks than header declares", r.pos());
    char magic[4];
    for (char& c : magic) c = static_cast<char>(r.u8());
    std::uint32_t len = r.u32be();
    if (std::memcmp(magic, "MTrk", 4) == 0) {
      tracks.push_back(parse_track(r, len, static_cast<int>(tracks.size())));
    } else {
      r.skip(len);  // unknown chunk types are ignored
    }
  }

  std::vector<TempoEntry> tempos;
  for (const auto& t : tracks) tempos.insert(tempos.end(), t.tempos.begin(), t.tempos.end());
  std::stable_sort(tempos.begin(), tempos.end(),
                   [](const TempoEntry& a, const TempoEntry& b) { return a.tick < b.tick; });
  // Duplicate ticks: the later event in file order wins.
  std::vector<TempoEntry> deduped;
  for (const auto& e : tempos) {
    if (!deduped.empty() && deduped.back().tick == e.tick) {
      deduped.back() = e;
    } else {
      deduped.push_back(e);
    }
  }
  TempoMap tempo_map(std::move(deduped), ppq);

  std::vector<RawEvent> merged;
  for (const auto& t : tracks) merged.insert(merged.end(), t.events.begin(), t.events.end());
  std::stable_sort(merged.begin(), merged.end(), [](const RawEvent& a, const RawEvent& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.track != b.track) return a.track < b.track;
    return a.order < b.order;
  });

  struct OpenNote {
    std::int64_t onset_tick;
    int velocity;
    bool pedal;
    std::int64_t open_seq;
  };

  SmfParseResult result;
  result.tempo_map = tempo_map;

  bool pedal_state[16] = {};
  std::map<int, std::deque<OpenNote>> open;  // key: channel << 8 | pitch
  std::int64_t open_seq = 0;

  struct PendingNote {
    NoteEvent note;
    std::int64_t open_seq;
  };
  std::vector<PendingNote> pending;

  auto close_note = [&](int pitch, OpenNote& on, std::int64_t off_tick) {
    double onset = tempo_map.tick_to_ms(on.onset_tick);
    double dur = tempo_map.tick_to_ms(off_tick) - onset;
    // NoteEvent requires a positive duration; degenerate zero-length pairs
    // get a negligible floor.
    dur = std::max(dur, 1e-3);
    pending.push_back({NoteEvent{pitch, onset, dur, on.velocity, on.pedal}, on.open_seq});
  };

  for (const auto& ev : merged) {
    switch (ev.kind) {
      case RawKind::Control:
        pedal_state[ev.channel] = ev.b >= 64;
        break;
      case RawKind::NoteOn:
        open[ev.channel << 8 | ev.a].push_back(
            {ev.tick, static_cast<int>(ev.b), pedal_state[ev.channel], open_seq++});
        break;
      case RawKind::NoteOff: {
        auto it = open.find(ev.channel << 8 | ev.a);
        if (it == open.end() || it->second.empty()) break;  // stray note-off
        close_note(ev.a, it->second.front(), ev.tick);
        it->second.pop_front();
        break;
      }
    }
  }
  // Dangling note-ons close at their track's final tick.
  for (auto& [key, queue] : open) {
    for (auto& on : queue) {
      std::int64_t final_tick = 0;
      for (const auto& t : tracks) final_tick = std::max(final_tick, t.end_tick);
      close_note(key & 0xff, on, final_tick);
      result.dangling_note_warning = true;
    }
  }

  std::sort(pending.begin(), pending.end(), [](const PendingNote& a, const PendingNote& b) {
    if (a.note.onset_ms != b.note.onset_ms) return a.note.onset_ms < b.note.onset_ms;
    return a.open_seq < b.open_seq;
  });
  result.notes.reserve(pending.size());
  for (auto& p : pending) result.notes.push_back(p.note);
  return result;
}

// ---------------------------------------------------------------------------
// write
// ---------------------------------------------------------------------------

namespace {

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u16be(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_vlq(std::vector<std::uint8_t>& out, std::int64_t value) {
  if (value < 0 || value > 0x0fffffff) throw ValidationError("delta time outside VLQ range");
  std::uint8_t buf[4];
  int n = 0;
  do {
    buf[n++] = static_cast<std::uint8_t>(value & 0x7f);
    value >>= 7;
  } while (value > 0);
  for (int i = n - 1; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>(buf[i] | (i > 0 ? 0x80 : 0x00)));
  }
}

struct WireEvent {
  std::int64_t tick;
  int phase;  // 0 = note-off, 1 = controller/note-on, 2 = same-tick note-off
  std::int64_t seq;
  std::uint8_t status, a, b;
};

}  // namespace

std::vector<std::uint8_t> write_smf(std::span<const NoteEvent> notes, int ppq) {
  if (ppq <= 0 || ppq > 0x7fff) throw ValidationError("write_smf: ppq outside [1,32767]");
  for (std::size_t i = 0; i < notes.size(); ++i) {
    const NoteEvent& n = notes[i];
    if (n.pitch < 0 || n.pitch > 127) throw ValidationError("write_smf: pitch outside [0,127]");
    if (n.velocity < 1 || n.velocity > 127) throw ValidationError("write_smf: velocity outside [1,127]");
    if (!(n.duration_ms > 0.0)) throw ValidationError("write_smf: duration must be positive");
    if (n.onset_ms < 0.0) throw ValidationError("write_smf: negative onset");
    if (i > 0 && n.onset_ms < notes[i - 1].onset_ms) {
      throw ValidationError("write_smf: notes must be sorted by onset");
    }
  }

  // Deterministic order: onset, ties by ascending pitch.
  std::vector<NoteEvent> sorted(notes.begin(), notes.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const NoteEvent& a, const NoteEvent& b) {
    if (a.onset_ms != b.onset_ms) return a.onset_ms < b.onset_ms;
    return a.pitch < b.pitch;
  });

  const double ticks_per_ms = static_cast<double>(ppq) / 500.0;  // fixed 500000 us/quarter
  auto to_tick = [&](double ms) { return std::llround(ms * ticks_per_ms); };

  std::vector<WireEvent> events;
  bool pedal = false;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const NoteEvent& n = sorted[i];
    std::int64_t on_tick = to_tick(n.onset_ms);
    std::int64_t off_tick = to_tick(n.onset_ms + n.duration_ms);
    std::int64_t seq = static_cast<std::int64_t>(i) * 3;
    if (n.pedal_on != pedal) {
      events.push_back({on_tick, 1, seq, 0xb0, 64, static_cast<std::uint8_t>(n.pedal_on ? 127 : 0)});
      pedal = n.pedal_on;
    }
    events.push_back({on_tick, 1, seq + 1, 0x90, static_cast<std::uint8_t>(n.pitch),
                      static_cast<std::uint8_t>(n.velocity)});
    events.push_back({off_tick, off_tick > on_tick ? 0 : 2, seq + 2, 0x80,
                      static_cast<std::uint8_t>(n.pitch), 0});
  }
  std::sort(events.begin(), events.end(), [](const WireEvent& a, const WireEvent& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.phase != b.phase) return a.phase < b.phase;
    return a.seq < b.seq;
  });

  std::vector<std::uint8_t> track;
  // Explicit tempo at tick 0; running status is never emitted.
  put_vlq(track, 0);
  track.insert(track.end(), {0xff, 0x51, 0x03, 0x07, 0xa1, 0x20});
  std::int64_t cursor = 0;
  for (const auto& ev : events) {
    put_vlq(track, ev.tick - cursor);
    cursor = ev.tick;
    track.push_back(ev.status);
    track.push_back(ev.a);
    track.push_back(ev.b);
  }
  put_vlq(track, 0);
  track.insert(track.end(), {0xff, 0x2f, 0x00});

  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'M', 'T', 'h', 'd'});
  put_u32be(out, 6);
  put_u16be(out, 0);
  put_u16be(out, 1);
  put_u16be(out, static_cast<std::uint16_t>(ppq));
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_u32be(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace xmg
