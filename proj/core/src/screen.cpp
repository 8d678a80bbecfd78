#include "xmg/screen.hpp"

#include <cmath>
#include <fstream>

namespace xmg {

double entropy(const Eigen::VectorXd& dist) {
  if (dist.size() == 0) throw ValidationError("entropy: empty distribution");
  double sum = 0.0, h = 0.0;
  for (int k = 0; k < dist.size(); ++k) {
    double p = dist[k];
    if (p < 0.0) throw ValidationError("entropy: negative probability");
    sum += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("entropy: probabilities must sum to 1");
  return h;
}

EntropyStats stats(std::span<const double> sequence, int window) {
  if (window < 1) throw ValidationError("stats: window must be at least 1");
  const std::size_t n = sequence.size();
  if (n < static_cast<std::size_t>(window)) {
    throw ValidationError("stats: sequence shorter than the moving-average window");
  }

  EntropyStats out;
  out.window = window;
  double mean = 0.0;
  for (double x : sequence) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : sequence) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);
  out.mean = mean;
  out.variance = var;

  const std::size_t count = n - static_cast<std::size_t>(window) + 1;
  std::vector<double> averages(count);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += sequence[i];
    if (i + 1 >= static_cast<std::size_t>(window)) {
      averages[i + 1 - window] = acc / window;
      acc -= sequence[i + 1 - window];
    }
  }
  double amean = 0.0;
  for (double a : averages) amean += a;
  amean /= static_cast<double>(count);
  double avar = 0.0;
  for (double a : averages) avar += (a - amean) * (a - amean);
  out.moving_avg_variance = avar / static_cast<double>(count);
  return out;
}

GroundTruthStats ground_truth_stats(const ModelSet& models,
                                    const std::vector<std::vector<NoteToken>>& corpus, int window) {
  if (corpus.size() < 2) {
    throw ValidationError("ground_truth_stats: needs at least 2 held-out sequences");
  }
  // per model, per statistic, one value per sequence
  std::array<std::array<std::vector<double>, 3>, 5> samples;
  for (const auto& sequence : corpus) {
    auto entropies = teacher_forced_entropies(models, sequence);
    for (int m = 0; m < kNumFields; ++m) {
      EntropyStats st = stats(entropies[m], window);
      samples[m][0].push_back(st.mean);
      samples[m][1].push_back(st.variance);
      samples[m][2].push_back(st.moving_avg_variance);
    }
  }

  GroundTruthStats out;
  out.window = window;
  for (int m = 0; m < kNumFields; ++m) {
    for (int s = 0; s < 3; ++s) {
      const auto& xs = samples[m][s];
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(xs.size() - 1);
      out.per_model[m][s] = {mean, std::sqrt(var)};
    }
  }
  return out;
}

void ScreeningConfig::validate() const {
  if (lambda < 0.0) throw ValidationError("ScreeningConfig: lambda must be nonnegative");
  if (kappa < 0.0) throw ValidationError("ScreeningConfig: kappa must be nonnegative");
  if (window < 1) throw ValidationError("ScreeningConfig: window must be at least 1");
}

SelectionResult rank_and_select(std::span<const std::array<std::vector<double>, 5>> candidates,
                                const GroundTruthStats& gt, const ScreeningConfig& config) {
  config.validate();
  if (candidates.empty()) throw ValidationError("rank_and_select: no candidates");
  constexpr double kStdFloor = 1e-9;

  SelectionResult result;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    ScoredCandidate row;
    row.candidate = static_cast<int>(c);
    double base = 0.0, reg = 0.0;
    for (int m = 0; m < kNumFields; ++m) {
      EntropyStats st = stats(candidates[c][m], config.window);
      row.per_model[m] = st;
      base += st.mean;
      const double values[3] = {st.mean, st.variance, st.moving_avg_variance};
      for (int s = 0; s < 3; ++s) {
        const StatSummary& summary = gt.per_model[m][s];
        reg += std::abs(values[s] - summary.mean) / std::max(summary.stddev, kStdFloor);
      }
    }
    row.base = base / kNumFields;
    row.regulation = reg / (kNumFields * 3);
    row.score = row.base + config.lambda * row.regulation;
    result.table.push_back(row);
  }

  result.winner = 0;
  for (std::size_t c = 1; c < result.table.size(); ++c) {
    if (result.table[c].score < result.table[result.winner].score) {
      result.winner = static_cast<int>(c);
    }
  }
  return result;
}

double aesthetic_score(const EntropyStats& st, double kappa) {
  if (kappa < 0.0) throw ValidationError("aesthetic_score: kappa must be nonnegative");
  return st.variance - kappa * st.mean;
}

void write_scored_csv(const SelectionResult& result, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "candidate";
  for (int m = 0; m < kNumFields; ++m) {
    os << ",m" << m << "_mean,m" << m << "_var,m" << m << "_mavar";
  }
  os << ",base,D,S\n";
  os.precision(12);
  for (const auto& row : result.table) {
    os << row.candidate;
    for (int m = 0; m < kNumFields; ++m) {
      os << ',' << row.per_model[m].mean << ',' << row.per_model[m].variance << ','
         << row.per_model[m].moving_avg_variance;
    }
    os << ',' << row.base << ',' << row.regulation << ',' << row.score << '\n';
  }
  if (!os) throw Error("failed writing " + path.string());
}

}  // namespace xmg
