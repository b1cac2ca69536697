#include "htsr/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "htsr/error.hpp"

namespace htsr::svg {

namespace {

constexpr std::array<std::string_view, 8> kPalette = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                      "#66a61e", "#e6ab02", "#a6761d", "#666666"};
constexpr std::string_view kOrigColour = "#f28e2b";

std::string num(double v) {
  // Avoid "-0.00" so equal coordinates print identically.
  const double r = std::round(v * 100.0) / 100.0;
  return fmt::format("{:.2f}", r == 0.0 ? 0.0 : r);
}

std::string header(double width, double height) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"Helvetica, Arial, sans-serif\" font-size=\"11\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      num(width), num(height));
}

std::string text(double x, double y, const std::string& content, std::string_view anchor = "middle",
                 std::string_view extra = "") {
  return fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"{}\"{}>{}</text>\n", num(x), num(y), anchor, extra,
                     escape(content));
}

// Blue shade from dark (t = 0) to light (t = 1).
std::string blue(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  return fmt::format("#{:02x}{:02x}{:02x}", mix(0x1f, 0xb3), mix(0x4e, 0xd1), mix(0x9c, 0xf5));
}

}  // namespace

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                       const std::vector<std::vector<LinePanel>>& grid, const std::string& y_label) {
  if (grid.empty() || grid.front().empty() || x_labels.empty()) throw PreconditionError("line chart has nothing to draw");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t max_lines = 0;
  std::vector<std::string> legend;
  for (const auto& row : grid) {
    for (const auto& panel : row) {
      max_lines = std::max(max_lines, panel.lines.size());
      for (const auto& line : panel.lines) {
        if (std::find(legend.begin(), legend.end(), line.label) == legend.end()) legend.push_back(line.label);
        for (const auto& y : line.y) {
          if (!y) continue;
          lo = std::min(lo, *y);
          hi = std::max(hi, *y);
        }
      }
    }
  }
  if (max_lines == 0 || !std::isfinite(lo)) throw PreconditionError("line chart has no curves");
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }

  constexpr double kPanelW = 220, kPanelH = 150, kGap = 30, kLeft = 60, kTop = 50, kLegend = 24;
  const std::size_t rows = grid.size();
  std::size_t cols = 0;
  for (const auto& r : grid) cols = std::max(cols, r.size());
  const double width = kLeft + static_cast<double>(cols) * (kPanelW + kGap);
  const double height = kTop + static_cast<double>(rows) * (kPanelH + kGap + 14) + kLegend + 20;

  std::string out = header(width, height);
  out += text(width / 2, 20, title, "middle", " font-size=\"14\" font-weight=\"bold\"");
  out += text(14, kTop + (height - kTop) / 2, y_label, "middle",
              fmt::format(" transform=\"rotate(-90 14 {})\"", num(kTop + (height - kTop) / 2)));

  const auto x_of = [&](double x0, std::size_t i) {
    const double step = x_labels.size() > 1 ? (kPanelW - 20) / static_cast<double>(x_labels.size() - 1) : 0.0;
    return x0 + 10 + step * static_cast<double>(i);
  };
  const auto y_of = [&](double y0, double v) { return y0 + kPanelH - (v - lo) / (hi - lo) * kPanelH; };

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      const auto& panel = grid[r][c];
      const double x0 = kLeft + static_cast<double>(c) * (kPanelW + kGap);
      const double y0 = kTop + static_cast<double>(r) * (kPanelH + kGap + 14) + 14;
      out += fmt::format("<g class=\"panel\" id=\"panel-{}-{}\">\n", r, c);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#cccccc\"/>\n",
                         num(x0), num(y0), num(kPanelW), num(kPanelH));
      out += text(x0 + kPanelW / 2, y0 - 4, panel.title);
      for (std::size_t i = 0; i < x_labels.size(); ++i) {
        out += text(x_of(x0, i), y0 + kPanelH + 12, x_labels[i], "middle", " font-size=\"9\"");
      }
      if (c == 0) {
        out += text(x0 - 4, y0 + kPanelH, num(lo), "end", " font-size=\"9\"");
        out += text(x0 - 4, y0 + 8, num(hi), "end", " font-size=\"9\"");
      }
      for (std::size_t l = 0; l < panel.lines.size(); ++l) {
        const auto& line = panel.lines[l];
        const auto colour =
            kPalette[static_cast<std::size_t>(std::find(legend.begin(), legend.end(), line.label) - legend.begin()) %
                     kPalette.size()];
        out += fmt::format("<g class=\"line\" data-label=\"{}\">\n", escape(line.label));
        std::string points;
        const auto flush = [&] {
          if (!points.empty()) {
            out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour,
                               points);
          }
          points.clear();
        };
        for (std::size_t i = 0; i < line.y.size() && i < x_labels.size(); ++i) {
          if (!line.y[i]) {
            flush();
            continue;
          }
          if (!points.empty()) points += ' ';
          points += num(x_of(x0, i)) + "," + num(y_of(y0, *line.y[i]));
        }
        flush();
        out += "</g>\n";
      }
      out += "</g>\n";
    }
  }
  double lx = kLeft;
  const double ly = height - 14;
  for (std::size_t i = 0; i < legend.size(); ++i) {
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"4\" fill=\"{}\"/>\n", num(lx), num(ly - 4),
                       kPalette[i % kPalette.size()]);
    out += text(lx + 16, ly, legend[i], "start");
    lx += 24 + 7.0 * static_cast<double>(legend[i].size());
  }
  out += "</svg>\n";
  return out;
}

std::string radar_chart(const std::string& title, const std::vector<std::string>& axes,
                        const std::vector<RadarSeries>& series, double max_value) {
  if (axes.size() < 3) throw PreconditionError(fmt::format("radar chart needs at least 3 axes, got {}", axes.size()));
  if (series.empty()) throw PreconditionError("radar chart has no series");
  if (!(max_value > 0.0)) throw PreconditionError("radar chart needs a positive maximum");
  constexpr double kRadius = 160, kSize = 460, kCx = 230, kCy = 240;
  const double height = kSize + 24.0 * static_cast<double>(series.size()) + 20;
  const auto n = axes.size();
  const auto angle = [n](std::size_t i) {
    return -std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  };

  std::string out = header(kSize, height);
  out += text(kCx, 22, title, "middle", " font-size=\"14\" font-weight=\"bold\"");
  const int rings = static_cast<int>(std::ceil(max_value));
  for (int k = 1; k <= rings; ++k) {
    const double r = kRadius * std::min(1.0, static_cast<double>(k) / max_value);
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pts.empty()) pts += ' ';
      pts += num(kCx + r * std::cos(angle(i))) + "," + num(kCy + r * std::sin(angle(i)));
    }
    out += fmt::format("<polygon class=\"grid\" fill=\"none\" stroke=\"#dddddd\" points=\"{}\"/>\n", pts);
    out += text(kCx + 3, kCy - r - 2, fmt::format("rank {}", k), "start", " font-size=\"8\" fill=\"#999999\"");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double x = kCx + kRadius * std::cos(angle(i));
    const double y = kCy + kRadius * std::sin(angle(i));
    out += fmt::format("<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\"/>\n", num(kCx),
                       num(kCy), num(x), num(y));
    out += text(kCx + (kRadius + 18) * std::cos(angle(i)), kCy + (kRadius + 18) * std::sin(angle(i)) + 4, axes[i]);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    if (sr.values.size() != n) {
      throw DimensionError(fmt::format("series '{}' has {} values for {} axes", sr.label, sr.values.size(), n));
    }
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = kRadius * sr.values[i] / max_value;
      if (!pts.empty()) pts += ' ';
      pts += num(kCx + r * std::cos(angle(i))) + "," + num(kCy + r * std::sin(angle(i)));
    }
    const auto colour = kPalette[s % kPalette.size()];
    out += fmt::format(
        "<polygon class=\"method\" data-label=\"{}\" fill=\"{}\" fill-opacity=\"0.08\" stroke=\"{}\" "
        "stroke-width=\"1.5\" points=\"{}\"/>\n",
        escape(sr.label), colour, colour, pts);
    const double ly = kSize + 24.0 * static_cast<double>(s);
    out += fmt::format("<rect x=\"40\" y=\"{}\" width=\"12\" height=\"4\" fill=\"{}\"/>\n", num(ly - 4), colour);
    out += text(58, ly, sr.label, "start");
  }
  out += text(kCx, height - 8, "distance from centre = rank (1 = best)", "middle", " font-size=\"9\" fill=\"#666666\"");
  out += "</svg>\n";
  return out;
}

std::string ridge_chart(const std::string& title, const std::vector<RidgeColumn>& columns) {
  if (columns.empty()) throw PreconditionError("ridge chart has no columns");
  constexpr double kColW = 260, kRowH = 90, kLayerStep = 9, kLeft = 110, kTop = 50;
  std::size_t rows = 0;
  std::size_t max_layers = 0;
  for (const auto& c : columns) {
    rows = std::max(rows, c.rows.size());
    for (const auto& r : c.rows) max_layers = std::max(max_layers, r.layers.size());
  }
  if (rows == 0) throw PreconditionError("ridge chart has no rows");
  const double row_h = kRowH + kLayerStep * static_cast<double>(max_layers);
  const double width = kLeft + static_cast<double>(columns.size()) * (kColW + 20);
  const double height = kTop + static_cast<double>(rows) * row_h + 30;

  std::string out = header(width, height);
  out += text(width / 2, 20, title, "middle", " font-size=\"14\" font-weight=\"bold\"");
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& col = columns[c];
    const double x0 = kLeft + static_cast<double>(c) * (kColW + 20);
    out += text(x0 + kColW / 2, kTop - 12, col.title, "middle", " font-weight=\"bold\"");
    for (std::size_t r = 0; r < col.rows.size(); ++r) {
      const auto& row = col.rows[r];
      const double base_y = kTop + static_cast<double>(r + 1) * row_h;
      if (c == 0) out += text(kLeft - 8, base_y - row_h / 2, row.label, "end");
      out += fmt::format("<g class=\"ridge-row\" id=\"ridge-{}-{}\">\n", c, r);
      // Later layers sit higher; draw back to front so earlier layers stay visible.
      for (std::size_t li = row.layers.size(); li-- > 0;) {
        const auto& layer = row.layers[li];
        if (layer.counts.empty() || layer.edges.size() != layer.counts.size() + 1) {
          throw DimensionError(fmt::format("ridge layer '{}' has mismatched bins", layer.label));
        }
        const double lo = layer.edges.front();
        const double hi = layer.edges.back();
        const std::size_t peak = *std::max_element(layer.counts.begin(), layer.counts.end());
        const double y_base = base_y - kLayerStep * static_cast<double>(li);
        const auto sx = [&](double v) { return x0 + (hi > lo ? (v - lo) / (hi - lo) : 0.5) * kColW; };
        const auto sy = [&](std::size_t count) {
          return y_base - (peak > 0 ? static_cast<double>(count) / static_cast<double>(peak) : 0.0) * (kRowH - 20);
        };
        std::string d = fmt::format("M{},{}", num(sx(lo)), num(y_base));
        for (std::size_t b = 0; b < layer.counts.size(); ++b) {
          d += fmt::format(" L{},{} L{},{}", num(sx(layer.edges[b])), num(sy(layer.counts[b])),
                           num(sx(layer.edges[b + 1])), num(sy(layer.counts[b])));
        }
        d += fmt::format(" L{},{} Z", num(sx(hi)), num(y_base));
        const auto fill = layer.original ? std::string(kOrigColour) : blue(layer.intensity);
        out += fmt::format(
            "<path class=\"silhouette{}\" data-label=\"{}\" fill=\"{}\" fill-opacity=\"0.75\" stroke=\"#ffffff\" "
            "stroke-width=\"0.6\" d=\"{}\"/>\n",
            layer.original ? " original" : "", escape(layer.label), fill, d);
      }
      out += "</g>\n";
    }
  }
  out += text(width / 2, height - 8, "DTW distance between series (orange: original, blue: transformed, lighter = stronger)",
              "middle", " font-size=\"9\" fill=\"#666666\"");
  out += "</svg>\n";
  return out;
}

}  // namespace htsr::svg
