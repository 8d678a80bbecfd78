#include <benchmark/benchmark.h>

#include <random>

#include "xmg/synthetic.hpp"
#include "xmg/train.hpp"

using namespace xmg;

namespace {

ModelSet models_with_hidden(int hidden) {
  ModelSet models;
  for (int m = 0; m < kNumFields; ++m) models[m] = init_params(m, hidden, 21 + m);
  return models;
}

}  // namespace

// Published preset shape: 2 layers, H = 150, widest submodel input (722).
static void BM_ForwardStep(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  ModelParams params = init_params(4, hidden, 3);
  LstmState lstm = zero_state(hidden);
  NoteToken prev{40, 50, 60, 20, 1};
  std::vector<int> prefix = {10, 20, 30, 15};
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_logits(params, prev, prefix, true, lstm));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardStep)->Arg(32)->Arg(150);

static void BM_SampleNote(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  ModelSet models = models_with_hidden(hidden);
  GeneratorState gs = zero_generator_state(models);
  std::mt19937_64 rng(5);
  NoteToken prev{0, 0, 0, 23, 0};
  for (auto _ : state) {
    SampleResult r = sample_note(models, gs, prev, 1.0, rng);
    prev = r.token;
    benchmark::DoNotOptimize(prev);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleNote)->Arg(32)->Arg(150);

static void BM_TrainSegment(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  auto corpus = planted_corpus(1, 129, 17, 16);  // one 128-step segment
  ModelParams params = init_params(2, hidden, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradients(params, corpus, true));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_TrainSegment)->Arg(32)->Arg(150);
