#include "xmg/attention.hpp"

#include <cmath>
#include <fstream>

namespace xmg {

AttentionMatrix attention_scores(const ModelSet& models) {
  AttentionMatrix out;
  out.values = Eigen::MatrixXd::Zero(kNumInputBlockRows, kNumFields);
  for (int m = 0; m < kNumFields; ++m) {
    const ModelParams& params = models[m];
    params.validate();
    if (params.submodel != m) throw ValidationError("attention_scores: models out of order");
    const Eigen::MatrixXd& w = params.layers[0].w_input;
    double total = 0.0;
    for (const InputBlock& block : input_blocks(m)) {
      double score = w.middleCols(block.offset, block.width).cwiseAbs().mean();
      out.values(block.row, m) = score;
      total += score;
    }
    if (total <= 0.0) {
      // All-zero weights: attribute uniformly over the active rows.
      const auto blocks = input_blocks(m);
      for (const InputBlock& block : blocks) {
        out.values(block.row, m) = 1.0 / static_cast<double>(blocks.size());
      }
    } else {
      out.values.col(m) /= total;
    }
  }
  return out;
}

SelfReferenceReport self_reference_report(const AttentionMatrix& matrix) {
  SelfReferenceReport report;
  for (int m = 0; m < kNumFields; ++m) {
    report.own_row_score[m] = matrix.values(m, m);  // previous-note row of the predicted field
    const int active_rows = kNumFields + m;
    report.active_row_mean[m] = 1.0 / static_cast<double>(active_rows);  // columns sum to 1
  }
  return report;
}

void write_attention_csv(const AttentionMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "field";
  for (int m = 0; m < kNumFields; ++m) os << ",m" << m << '_' << kFieldNames[m];
  os << '\n';
  os.precision(12);
  for (int r = 0; r < kNumInputBlockRows; ++r) {
    os << kInputBlockNames[r];
    for (int m = 0; m < kNumFields; ++m) os << ',' << matrix.values(r, m);
    os << '\n';
  }
  if (!os) throw Error("failed writing " + path.string());
}

}  // namespace xmg
