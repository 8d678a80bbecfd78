#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "xmg/layout.hpp"
#include "xmg/token.hpp"

namespace xmg {

/// Parameters for one LSTM layer. Gates are stacked row-wise in the order
/// input, forget, cell-candidate, output, so every matrix has 4H rows.
struct LstmLayer {
  Eigen::MatrixXd w_input;      // 4H x input width
  Eigen::MatrixXd w_recurrent;  // 4H x H
  Eigen::VectorXd bias;         // 4H
};

/// Weights of one single-output submodel: a 2-layer LSTM core plus a linear
/// projection onto that field's classes.
struct ModelParams {
  int submodel = 0;  // 0..4 = n,t,d,v,p
  int hidden = 0;
  std::array<LstmLayer, 2> layers;
  Eigen::MatrixXd w_output;  // classes x H
  Eigen::VectorXd b_output;  // classes

  int input_dim() const { return static_cast<int>(layers[0].w_input.cols()); }
  int output_classes() const { return static_cast<int>(w_output.rows()); }
  void validate() const;  // shape consistency with FieldLayout, finiteness

  /// Visits every parameter array as a flat span, in the declared checkpoint
  /// order: layer1 (w_input, w_recurrent, bias), layer2 likewise, then
  /// w_output and b_output. Matrices are visited in Eigen's column-major
  /// storage order.
  template <typename Fn>
  void visit_params(Fn&& fn) {
    for (auto& layer : layers) {
      fn(std::span<double>(layer.w_input.data(), static_cast<std::size_t>(layer.w_input.size())));
      fn(std::span<double>(layer.w_recurrent.data(), static_cast<std::size_t>(layer.w_recurrent.size())));
      fn(std::span<double>(layer.bias.data(), static_cast<std::size_t>(layer.bias.size())));
    }
    fn(std::span<double>(w_output.data(), static_cast<std::size_t>(w_output.size())));
    fn(std::span<double>(b_output.data(), static_cast<std::size_t>(b_output.size())));
  }
  template <typename Fn>
  void visit_params(Fn&& fn) const {
    const_cast<ModelParams*>(this)->visit_params(
        [&](std::span<double> s) { fn(std::span<const double>(s.data(), s.size())); });
  }
  std::size_t param_count() const;
};

/// Weights uniform in [-1/sqrt(H), 1/sqrt(H)], then +1 added to the forget
/// gate bias. Deterministic in the seed.
ModelParams init_params(int submodel, int hidden, std::uint64_t seed);

struct LstmState {
  Eigen::VectorXd h1, c1, h2, c2;
};
LstmState zero_state(int hidden);

/// The one-hot input of a submodel as the list of hot column indices:
/// the previous note's five fields, plus (when conditioned) the already
/// decided fields of the current note.
std::vector<int> hot_indices(int submodel, const NoteToken& prev, std::span<const int> cur_prefix,
                             bool conditioned);

/// One recurrence step: assembles the input, advances `state`, and returns
/// the raw output logits. Deterministic given (params, inputs, state).
Eigen::VectorXd forward_logits(const ModelParams& params, const NoteToken& prev,
                               std::span<const int> cur_prefix, bool conditioned, LstmState& state);

/// forward_logits followed by softmax at temperature 1.
Eigen::VectorXd forward_step(const ModelParams& params, const NoteToken& prev,
                             std::span<const int> cur_prefix, bool conditioned, LstmState& state);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits, double temperature = 1.0);

/// Portable 53-bit uniform draw in [0,1); keeps sampling bit-reproducible
/// across standard libraries.
double uniform01(std::mt19937_64& rng);

int sample_class(const Eigen::VectorXd& dist, std::mt19937_64& rng);

using ModelSet = std::array<ModelParams, 5>;

struct GeneratorState {
  std::array<LstmState, 5> states;
};
GeneratorState zero_generator_state(const ModelSet& models);

struct SampleResult {
  NoteToken token;
  std::array<Eigen::VectorXd, 5> dists;  // the temperature-scaled dists sampled from
};

/// Samples one note field by field in the order n,t,d,v,p, each field's
/// distribution conditioned on the fields of this note already sampled.
SampleResult sample_note(const ModelSet& models, GeneratorState& state, const NoteToken& prev,
                         double temperature, std::mt19937_64& rng);

/// Ablation: identical wiring but the current-note conditioning blocks are
/// fed zeros, so the five fields are sampled from independent distributions.
SampleResult sample_note_independent(const ModelSet& models, GeneratorState& state,
                                     const NoteToken& prev, double temperature, std::mt19937_64& rng);

/// Log-probability of `token` under the factorized model, scored teacher-
/// forced from a copy of `state` (the caller's state is not advanced).
double token_log_prob(const ModelSet& models, GeneratorState state, const NoteToken& prev,
                      const NoteToken& token, double temperature = 1.0);

/// Runs the five submodels teacher-forced over a sequence and records the
/// entropy of each step's output distribution. Sequences of length L yield
/// five entropy sequences of length L-1.
std::array<std::vector<double>, 5> teacher_forced_entropies(const ModelSet& models,
                                                            std::span<const NoteToken> sequence);

struct Candidate {
  std::vector<NoteToken> tokens;
  std::array<std::vector<double>, 5> entropies;
};

/// Autoregressive rollout: `count` candidates of `length` notes from `seed`,
/// per-candidate rng streams derived from `rng_seed` so candidates are
/// independent and individually reproducible. Parameters are read-only
/// during sampling; distinct candidates could run concurrently, the
/// recurrence within one candidate cannot.
std::vector<Candidate> generate(const ModelSet& models, const NoteToken& seed, int length, int count,
                                double temperature, std::uint64_t rng_seed);
std::vector<Candidate> generate_independent(const ModelSet& models, const NoteToken& seed, int length,
                                            int count, double temperature, std::uint64_t rng_seed);

// Checkpoint container: magic "XMG1", little-endian header (submodel id,
// layer dims, class counts), then the parameter arrays as flat 32-bit floats
// in visit_params order.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace xmg
