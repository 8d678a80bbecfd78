#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>

#include "xmg/model.hpp"

namespace xmg {

/// Per-input-field weight attribution: rows are the nine possible input
/// blocks (previous-note n,t,d,v,p then current-note n,t,d,v), columns the
/// five submodels. Each column sums to 1; rows absent from a submodel's
/// layout are 0.
struct AttentionMatrix {
  Eigen::MatrixXd values;  // kNumInputBlockRows x 5
};

/// The raw score of block g in submodel m is the mean absolute value of all
/// layer-1 input-weight entries in g's columns (the mean, not the sum, so
/// wider blocks are not inflated); columns are then normalized to sum 1.
AttentionMatrix attention_scores(const ModelSet& models);

/// Diagnostic for the self-referencing trend: for each submodel, the score
/// of its own previous-note row against the mean over its active rows.
/// Reported, not asserted.
struct SelfReferenceReport {
  std::array<double, 5> own_row_score;
  std::array<double, 5> active_row_mean;
};

SelfReferenceReport self_reference_report(const AttentionMatrix& matrix);

void write_attention_csv(const AttentionMatrix& matrix, const std::filesystem::path& path);

}  // namespace xmg
