#include <benchmark/benchmark.h>

#include <random>

#include "xmg/codec.hpp"

using namespace xmg;

namespace {

std::vector<double> lognormal_values(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(4.0, 1.5);
  std::vector<double> values(count);
  for (double& v : values) v = dist(rng);
  return values;
}

CodecConfig calibrated_config() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> vel(0.0, 14.0);
  std::vector<double> deltas(30000);
  for (double& v : deltas) v = std::round(vel(rng));
  CodecConfig config;
  config.time_shift = calibrate(lognormal_values(30000, 1), 105, DomainKind::Nonnegative);
  config.duration = calibrate(lognormal_values(30000, 2), 120, DomainKind::Nonnegative);
  config.velocity_change = calibrate(deltas, 47, DomainKind::Signed);
  return config;
}

std::vector<NoteEvent> performance_notes(int count) {
  std::mt19937_64 rng(3);
  std::vector<NoteEvent> notes;
  double onset = 0.0;
  for (int i = 0; i < count; ++i) {
    onset += static_cast<double>(rng() % 400);
    notes.push_back({static_cast<int>(21 + rng() % 88), onset, 20.0 + static_cast<double>(rng() % 1500),
                     static_cast<int>(1 + rng() % 127), (rng() & 1) != 0});
  }
  return notes;
}

}  // namespace

static void BM_Calibrate105(benchmark::State& state) {
  auto values = lognormal_values(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(values, 105, DomainKind::Nonnegative));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Calibrate105)->Arg(10000)->Arg(100000);

static void BM_Quantize(benchmark::State& state) {
  CodecConfig config = calibrated_config();
  auto values = lognormal_values(4096, 9);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantize(values[i++ & 4095], config.time_shift));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Quantize);

static void BM_EncodeDecode(benchmark::State& state) {
  CodecConfig config = calibrated_config();
  auto notes = performance_notes(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto tokens = encode(notes, config).tokens;
    benchmark::DoNotOptimize(decode(tokens, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeDecode)->Arg(1000);
