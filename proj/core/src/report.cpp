#include "irmkit/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "irmkit/error.hpp"
#include "irmkit/io.hpp"
#include "text.hpp"

namespace irmkit {

namespace {

struct Rgb {
  double r, g, b;
};

constexpr std::array<Rgb, 3> kRamp{{{247, 251, 255}, {107, 174, 214}, {8, 48, 107}}};

std::string colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 2.0;
  const auto lo = static_cast<std::size_t>(std::min(pos, 1.0));
  const double f = pos - static_cast<double>(lo);
  const Rgb& a = kRamp[lo];
  const Rgb& b = kRamp[lo + 1];
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(a.r + f * (b.r - a.r))),
                static_cast<int>(std::lround(a.g + f * (b.g - a.g))),
                static_cast<int>(std::lround(a.b + f * (b.b - a.b))));
  return buf;
}

std::string escape_xml(std::string_view s) {
  std::string out;
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

}  // namespace

std::string matrix_csv(std::span<const std::string> labels, const Matrix& values) {
  if (static_cast<Eigen::Index>(labels.size()) != values.rows() || values.rows() != values.cols()) {
    throw ValidationError("matrix and labels disagree in size");
  }
  std::string out = "cell";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out += labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      out += ",";
      if (std::isfinite(values(i, j))) out += detail::format_double(values(i, j));
    }
    out += "\n";
  }
  return out;
}

std::string heatmap_svg(const SimilarityMatrix& m) {
  constexpr int kCell = 44;
  constexpr int kMargin = 110;
  const auto n = static_cast<int>(m.labels.size());
  const int size = kMargin + n * kCell + 10;
  const double floor = metric_floor(m.metric);
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"10\">\n",
                size, size + 20);
  svg += buf;
  svg += "<text x=\"4\" y=\"14\" font-size=\"13\">" + escape_xml(to_string(m.metric)) + " (mean over seeds)</text>\n";
  for (int i = 0; i < n; ++i) {
    const auto& label = escape_xml(m.labels[static_cast<std::size_t>(i)]);
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" text-anchor=\"end\">", kMargin - 4,
                  kMargin + i * kCell + kCell / 2 + 4);
    svg += buf + label + "</text>\n";
    std::snprintf(buf, sizeof buf, "<text transform=\"translate(%d,%d) rotate(-60)\">", kMargin + i * kCell + kCell / 2,
                  kMargin - 4);
    svg += buf + label + "</text>\n";
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = m.mean(i, j);
      const bool ok = std::isfinite(v);
      const double t = ok ? (v - floor) / (1.0 - floor) : 0.0;
      std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n",
                    kMargin + j * kCell, kMargin + i * kCell, kCell, kCell, ok ? colour(t).c_str() : "#cccccc");
      svg += buf;
      if (ok) {
        std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\" fill=\"%s\">%.2f</text>\n",
                      kMargin + j * kCell + kCell / 2, kMargin + i * kCell + kCell / 2 + 4,
                      t > 0.6 ? "#ffffff" : "#000000", v);
        svg += buf;
      }
    }
  }
  svg += "</svg>\n";
  return svg;
}

void write_heatmaps(const SweepReport& report, const std::filesystem::path& dir, bool svg) {
  for (const auto& m : report.matrices) {
    const std::string name(to_string(m.metric));
    write_text_file(dir / (name + ".csv"), matrix_csv(m.labels, m.mean));
    write_text_file(dir / (name + "_ci_low.csv"), matrix_csv(m.labels, m.ci_low));
    write_text_file(dir / (name + "_ci_high.csv"), matrix_csv(m.labels, m.ci_high));
    if (svg) write_text_file(dir / (name + ".svg"), heatmap_svg(m));
  }
}

}  // namespace irmkit
