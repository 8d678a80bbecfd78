#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "xmg/model.hpp"

namespace xmg {

/// Shannon entropy in nats, with 0*ln(0) = 0.
double entropy(const Eigen::VectorXd& dist);

/// Summary statistics of one entropy sequence. The moving-average variance
/// is the population variance of the trailing-window-W means, a
/// trend-sensitive fluctuation measure.
struct EntropyStats {
  double mean = 0.0;
  double variance = 0.0;
  double moving_avg_variance = 0.0;
  int window = 1;
};

/// Population mean/variance plus moving-average variance over trailing
/// windows of length `window`. Rejects sequences shorter than the window.
EntropyStats stats(std::span<const double> sequence, int window);

struct StatSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (N-1)
};

/// Per submodel, the distribution of each statistic (mean, variance,
/// moving-average variance) over a held-out corpus.
struct GroundTruthStats {
  std::array<std::array<StatSummary, 3>, 5> per_model;
  int window = 1;
};

GroundTruthStats ground_truth_stats(const ModelSet& models,
                                    const std::vector<std::vector<NoteToken>>& corpus, int window);

struct ScreeningConfig {
  double lambda = 0.5;  // regulation weight; 0 = pure ascending-mean selection
  int window = 16;      // moving-average window
  double kappa = 1.0;   // aesthetic trade-off weight (report only)

  void validate() const;
};

struct ScoredCandidate {
  int candidate = 0;
  std::array<EntropyStats, 5> per_model;
  double base = 0.0;        // mean over submodels of the entropy-sequence means
  double regulation = 0.0;  // mean z-distance from the ground-truth statistics
  double score = 0.0;       // base + lambda * regulation
};

struct SelectionResult {
  int winner = 0;  // argmin score, ties broken by lower index
  std::vector<ScoredCandidate> table;
};

/// Ranks candidates ascending by mean entropy, regulated by the z-distance
/// of their statistics from the ground truth:
///   score = base + lambda * mean_{m,stat} |stat - gt_mean| / max(gt_std, 1e-9).
SelectionResult rank_and_select(std::span<const std::array<std::vector<double>, 5>> candidates,
                                const GroundTruthStats& gt, const ScreeningConfig& config);

/// The qualitative low-mean/high-variance prescription made concrete:
/// A = variance - kappa * mean. Report-only; not a validated perceptual
/// measure and excluded from selection.
double aesthetic_score(const EntropyStats& stats, double kappa);

// Scored table as CSV: candidate, per-submodel mean/var/mavar, base, D, S.
void write_scored_csv(const SelectionResult& result, const std::filesystem::path& path);

}  // namespace xmg
