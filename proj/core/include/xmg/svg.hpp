#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace xmg::svg {

/// Bar chart of one value per category (class-frequency histograms).
std::string bar_chart(const std::string& title, const std::vector<double>& values,
                      const std::string& x_label, const std::string& y_label);

/// Grayscale heat map with row/column labels; cell text shows the value.
std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const Eigen::MatrixXd& values);

struct DistributionPanel {
  std::string label;
  std::vector<double> values;  // raw samples, binned internally
  double marker_mean = 0.0;    // reference line (ground-truth mean)
  bool has_marker = false;
};

/// Stacked per-group histograms of a statistic's distribution with optional
/// reference markers.
std::string distribution_panels(const std::string& title,
                                const std::vector<DistributionPanel>& panels, int bins = 24);

void save(const std::string& svg, const std::filesystem::path& path);

}  // namespace xmg::svg
