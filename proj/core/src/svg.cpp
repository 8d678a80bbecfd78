#include "xmg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xmg/errors.hpp"

namespace xmg::svg {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Doc {
public:
  Doc(int width, int height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
          << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0) {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
          << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(stroke_width) << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "start") {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << xml_escape(s)
          << "</text>\n";
  }

  std::string str() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
       << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n"
       << "<rect width=\"" << width_ << "\" height=\"" << height_ << "\" fill=\"white\"/>\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

private:
  int width_, height_;
  std::ostringstream body_;
};

std::string gray(double intensity) {
  int level = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(intensity, 0.0, 1.0))));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", level, level, level);
  return buf;
}

}  // namespace

std::string bar_chart(const std::string& title, const std::vector<double>& values,
                      const std::string& x_label, const std::string& y_label) {
  const int width = 720, height = 360;
  const double left = 60, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  Doc doc(width, height);
  doc.text(width / 2.0, 22, title, 14, "middle");

  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;

  const double bar_w = plot_w / std::max<std::size_t>(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double h = plot_h * values[i] / vmax;
    doc.rect(left + i * bar_w, top + plot_h - h, std::max(bar_w - 1.0, 0.5), h, "rgb(70,110,180)");
  }
  doc.line(left, top + plot_h, left + plot_w, top + plot_h, "black");
  doc.line(left, top, left, top + plot_h, "black");
  doc.text(left - 6, top + 10, fmt(vmax), 10, "end");
  doc.text(left - 6, top + plot_h, "0", 10, "end");
  doc.text(width / 2.0, height - 12, x_label, 11, "middle");
  doc.text(14, top - 8, y_label, 11);
  return doc.str();
}

std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const Eigen::MatrixXd& values) {
  if (values.rows() != static_cast<Eigen::Index>(row_labels.size()) ||
      values.cols() != static_cast<Eigen::Index>(col_labels.size())) {
    throw ValidationError("heatmap: label counts must match the matrix shape");
  }
  const double cell = 56, left = 80, top = 60;
  const int width = static_cast<int>(left + cell * values.cols() + 30);
  const int height = static_cast<int>(top + cell * values.rows() + 30);
  Doc doc(width, height);
  doc.text(width / 2.0, 24, title, 14, "middle");

  double vmax = values.maxCoeff();
  if (vmax <= 0.0) vmax = 1.0;
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    doc.text(left - 8, top + r * cell + cell / 2 + 4, row_labels[r], 11, "end");
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      double v = values(r, c);
      doc.rect(left + c * cell, top + r * cell, cell - 2, cell - 2, gray(v / vmax));
      doc.text(left + c * cell + cell / 2 - 1, top + r * cell + cell / 2 + 4, fmt(v), 9, "middle");
    }
  }
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    doc.text(left + c * cell + cell / 2 - 1, top - 10, col_labels[c], 11, "middle");
  }
  return doc.str();
}

std::string distribution_panels(const std::string& title,
                                const std::vector<DistributionPanel>& panels, int bins) {
  if (bins < 1) throw ValidationError("distribution_panels: bins must be positive");
  const int width = 720;
  const double panel_h = 110, left = 90, right = 30, top = 44;
  const int height = static_cast<int>(top + panel_h * panels.size() + 20);
  Doc doc(width, height);
  doc.text(width / 2.0, 24, title, 14, "middle");

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const double py = top + p * panel_h;
    const double plot_h = panel_h - 34;
    const double plot_w = width - left - right;
    doc.text(left - 8, py + plot_h / 2, panel.label, 11, "end");

    double lo = panel.values.empty() ? 0.0 : panel.values[0];
    double hi = lo;
    for (double v : panel.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (panel.has_marker) {
      lo = std::min(lo, panel.marker_mean);
      hi = std::max(hi, panel.marker_mean);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double span = hi - lo;

    std::vector<int> counts(bins, 0);
    for (double v : panel.values) {
      int b = std::min(bins - 1, static_cast<int>((v - lo) / span * bins));
      ++counts[std::max(b, 0)];
    }
    int cmax = 1;
    for (int c : counts) cmax = std::max(cmax, c);

    const double bar_w = plot_w / bins;
    for (int b = 0; b < bins; ++b) {
      double h = plot_h * counts[b] / cmax;
      doc.rect(left + b * bar_w, py + plot_h - h, std::max(bar_w - 1.0, 0.5), h, "rgb(70,110,180)");
    }
    doc.line(left, py + plot_h, left + plot_w, py + plot_h, "black");
    if (panel.has_marker) {
      double x = left + (panel.marker_mean - lo) / span * plot_w;
      doc.line(x, py, x, py + plot_h, "rgb(200,60,40)", 1.5);
    }
    doc.text(left, py + plot_h + 14, fmt(lo), 9);
    doc.text(left + plot_w, py + plot_h + 14, fmt(hi), 9, "end");
  }
  return doc.str();
}

void save(const std::string& svg, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << svg;
  if (!os) throw Error("failed writing " + path.string());
}

}  // namespace xmg::svg
