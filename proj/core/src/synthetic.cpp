#include "xmg/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace xmg {

namespace {

// Velocity-change cycle: 0, +1, -1, ..., +23, -23. Distinct values, zero
// sum, partial sums in [0, 23].
int velocity_delta(int phase) {
  if (phase == 0) return 0;
  int k = (phase + 1) / 2;
  return phase % 2 == 1 ? k : -k;
}

}  // namespace

std::vector<NoteEvent> cycle_notes(int count) {
  // All times are integer milliseconds. Written at kCyclePpq (1 ms per tick
  // under the fixed 500000 us/quarter tempo) they survive the SMF round trip
  // exactly, so the calibrated classes coincide with the cycle phases.
  std::vector<NoteEvent> notes;
  notes.reserve(count);
  double onset = 0.0;
  int velocity = 64;
  for (int i = 0; i < count; ++i) {
    if (i > 0) {
      velocity += velocity_delta(i % 47);
      onset += 100.0 + static_cast<double>(i % 105) * 5.0;
    }
    NoteEvent note;
    note.pitch = 21 + i % 88;
    note.onset_ms = onset;
    note.duration_ms = 80.0 + static_cast<double>(i % 120) * 4.0;
    note.velocity = velocity;
    note.pedal_on = i % 2 == 1;
    notes.push_back(note);
  }
  return notes;
}

std::vector<int> planted_n_support(int size) {
  if (size < 2 || size > kFieldClasses[kFieldN]) {
    throw ValidationError("planted_n_support: size outside [2,88]");
  }
  std::vector<int> support(size);
  for (int i = 0; i < size; ++i) {
    support[i] = static_cast<int>(std::lround(static_cast<double>(i) * 87.0 / (size - 1)));
  }
  return support;
}

int planted_d_of_n(int n_class) {
  if (n_class < 0 || n_class >= kFieldClasses[kFieldN]) {
    throw ValidationError("planted_d_of_n: n class outside [0,87]");
  }
  return (7 * n_class + 3) % kFieldClasses[kFieldD];
}

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int markov_step(int current_index, int size, std::mt19937_64& rng) {
  if (u01(rng) < kPlantedCycleProb) return (current_index + 1) % size;
  return static_cast<int>(rng() % static_cast<unsigned>(size));
}

}  // namespace

std::vector<std::vector<NoteToken>> planted_corpus(int sequences, int length, std::uint64_t seed,
                                                   int n_support) {
  if (sequences < 1 || length < 2) {
    throw ValidationError("planted_corpus: needs at least 1 sequence of length 2");
  }
  const std::vector<int> support = planted_n_support(n_support);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<NoteToken>> corpus;
  corpus.reserve(sequences);
  for (int s = 0; s < sequences; ++s) {
    std::vector<NoteToken> sequence;
    sequence.reserve(length);
    int v_idx = static_cast<int>(rng() % kPlantedV.size());
    for (int i = 0; i < length; ++i) {
      if (i > 0) v_idx = markov_step(v_idx, static_cast<int>(kPlantedV.size()), rng);
      NoteToken tok;
      tok.n = support[rng() % support.size()];
      tok.t = kPlantedT[rng() % kPlantedT.size()];
      tok.d = planted_d_of_n(tok.n);
      tok.v = kPlantedV[v_idx];
      tok.p = static_cast<int>(rng() % 2);
      sequence.push_back(tok);
    }
    corpus.push_back(std::move(sequence));
  }
  return corpus;
}

NoteToken planted_seed_token(std::mt19937_64& rng, int n_support) {
  const std::vector<int> support = planted_n_support(n_support);
  NoteToken tok;
  tok.n = support[rng() % support.size()];
  tok.t = kPlantedT[rng() % kPlantedT.size()];
  tok.d = planted_d_of_n(tok.n);
  tok.v = kPlantedV[rng() % kPlantedV.size()];
  tok.p = static_cast<int>(rng() % 2);
  return tok;
}

NoteToken random_token(std::mt19937_64& rng) {
  NoteToken tok;
  for (int f = 0; f < kNumFields; ++f) {
    tok.set_field(f, static_cast<int>(rng() % kFieldClasses[f]));
  }
  return tok;
}

void inject_aliens(std::vector<NoteToken>& sequence, int count, std::mt19937_64& rng) {
  if (count < 0 || static_cast<std::size_t>(count) > sequence.size()) {
    throw ValidationError("inject_aliens: count outside [0, sequence length]");
  }
  std::vector<std::size_t> positions(sequence.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  for (int k = 0; k < count; ++k) {
    std::size_t pick = k + rng() % (positions.size() - k);
    std::swap(positions[k], positions[pick]);
    sequence[positions[k]] = random_token(rng);
  }
}

}  // namespace xmg
