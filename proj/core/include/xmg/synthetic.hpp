#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "xmg/midi_io.hpp"
#include "xmg/token.hpp"

namespace xmg {

// ---------------------------------------------------------------------------
// Deterministic-cycle performance language (note domain).
//
// Every field follows its own deterministic cycle with exactly as many
// distinct values as Table 1 has classes (105 time shifts plus the leading
// zero, 120 durations, 24 velocity-change magnitudes), so equal-frequency
// calibration is forced to give each cycle phase its own class. After
// calibrate + encode, each token field is a fixed permutation of its
// predecessor and all five submodels can drive their training loss to ~0.
// ---------------------------------------------------------------------------

/// One performance of `count` notes starting at cycle phase 0.
std::vector<NoteEvent> cycle_notes(int count);

/// Write resolution under which the cycle's integer-millisecond times map
/// 1:1 onto ticks (500000 us/quarter at 500 ticks per quarter = 1 ms/tick).
inline constexpr int kCyclePpq = 500;

// ---------------------------------------------------------------------------
// Planted-coupling token language.
//
// A synthetic language with known structure, used as the oracle for the
// conditioned-vs-independent comparison:
//   n: iid uniform over an evenly spaced support
//   t: iid uniform over two classes
//   d: deterministically coupled to the current note's n
//   v: a Markov walk over three classes, cycle-successor with probability
//      kPlantedCycleProb, else a uniform jump (the corpus' temporal channel)
//   p: iid fair coin
// The true (n,d) joint is uniform over the (n, planted_d_of_n(n)) pairs, and
// because n carries no serial dependence, an independent-output model rolled
// out on its own samples keeps clean marginals while its joint stays a
// product. The support size trades statistical resolution (small supports
// give tight empirical joints at 10k samples) against input-block coverage
// (the full 88-class support exercises every column of the n one-hot block).
// ---------------------------------------------------------------------------

inline constexpr std::array<int, 2> kPlantedT = {20, 60};
inline constexpr std::array<int, 3> kPlantedV = {5, 23, 40};
inline constexpr double kPlantedCycleProb = 0.75;

/// Evenly spaced n classes over [0,87]; size in [2,88].
std::vector<int> planted_n_support(int size);

/// The planted coupling d = f(n) = (7n + 3) mod 120, injective over [0,87].
int planted_d_of_n(int n_class);

std::vector<std::vector<NoteToken>> planted_corpus(int sequences, int length, std::uint64_t seed,
                                                   int n_support = 16);

/// A token drawn from the language's stationary distribution, valid as a
/// rollout seed without burn-in bias.
NoteToken planted_seed_token(std::mt19937_64& rng, int n_support = 16);

/// A token drawn uniformly over the full class ranges of all five fields.
NoteToken random_token(std::mt19937_64& rng);

/// Replaces `count` distinct random positions with uniform random tokens —
/// the exposure-bias simulation used by the screening tests.
void inject_aliens(std::vector<NoteToken>& sequence, int count, std::mt19937_64& rng);

}  // namespace xmg
