#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "xmg/model.hpp"

namespace xmg {

struct TrainConfig {
  int hidden = 150;
  double learning_rate = 2e-3;
  int epochs = 50;
  int segment_length = 128;  // truncated-BPTT window, state carried across segments
  double clip_norm = 5.0;    // global gradient-norm clip
  std::uint64_t seed = 1;
  bool conditioned = true;  // false trains the independent-output ablation

  // Adam constants.
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  void validate() const;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_curve;  // mean cross-entropy in nats, one entry per epoch
};

/// Trains one submodel with teacher forcing: ground-truth current-note
/// prefix fields are always fed, never sampled. Updates are Adam steps per
/// truncated-BPTT segment. Throws NumericError (with the failing step index
/// and gradient norms) if the loss turns non-finite. Pass `initial` to
/// resume from a checkpoint.
TrainResult train(const std::vector<std::vector<NoteToken>>& corpus, int submodel,
                  const TrainConfig& config, const ModelParams* initial = nullptr);

/// Mean per-step cross-entropy (nats) of the corpus under `params`,
/// teacher-forced, full sequences, no truncation. Forward-only; this is the
/// function finite-difference gradient checks probe.
double sequence_loss(const ModelParams& params, const std::vector<std::vector<NoteToken>>& corpus,
                     bool conditioned = true);

struct LossAndGradients {
  double loss = 0.0;
  ModelParams gradients;  // same shapes as the parameters
};

/// Loss plus analytic gradients via backpropagation through time over the
/// full sequences.
LossAndGradients loss_and_gradients(const ModelParams& params,
                                    const std::vector<std::vector<NoteToken>>& corpus,
                                    bool conditioned = true);

// Loss curves as CSV: header "epoch,loss", epochs 1-based.
void write_loss_csv(const std::vector<double>& curve, const std::filesystem::path& path);
std::vector<double> read_loss_csv(const std::filesystem::path& path);

}  // namespace xmg
