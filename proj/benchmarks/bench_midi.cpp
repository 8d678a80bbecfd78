#include <benchmark/benchmark.h>

#include <random>

#include "xmg/midi_io.hpp"

using namespace xmg;

namespace {

std::vector<NoteEvent> random_notes(int count) {
  std::mt19937_64 rng(11);
  std::vector<NoteEvent> notes;
  double onset = 0.0;
  for (int i = 0; i < count; ++i) {
    onset += static_cast<double>(rng() % 300);
    notes.push_back({static_cast<int>(21 + rng() % 88), onset, 30.0 + static_cast<double>(rng() % 900),
                     static_cast<int>(1 + rng() % 127), (rng() & 1) != 0});
  }
  return notes;
}

}  // namespace

static void BM_WriteSmf(benchmark::State& state) {
  auto notes = random_notes(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(write_smf(notes, 480));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WriteSmf)->Arg(5000);

static void BM_ParseSmf(benchmark::State& state) {
  auto bytes = write_smf(random_notes(static_cast<int>(state.range(0))), 480);
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_smf(bytes));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ParseSmf)->Arg(5000);
