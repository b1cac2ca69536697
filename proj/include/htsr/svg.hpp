#pragma once

#include <optional>
#include <string>
#include <vector>

namespace htsr::svg {

// Minimal deterministic SVG charts: fixed ids, fixed number formatting and no
// timestamps, so identical inputs give byte-identical files.

struct LineSeries {
  std::string label;
  /// One value per x label; empty entries are gaps.
  std::vector<std::optional<double>> y;
};

struct LinePanel {
  std::string title;
  std::vector<LineSeries> lines;
};

/// Small-multiples grid; `grid[row][col]` is one panel. All panels share the
/// x labels and the y range.
std::string line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                       const std::vector<std::vector<LinePanel>>& grid, const std::string& y_label);

struct RadarSeries {
  std::string label;
  std::vector<double> values;
};

/// One axis per label, one polygon per series; radius is value / max_value.
/// Requires at least three axes.
std::string radar_chart(const std::string& title, const std::vector<std::string>& axes,
                        const std::vector<RadarSeries>& series, double max_value);

struct RidgeLayer {
  std::string label;
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  bool original = false;
  /// 0 for the mildest transformed layer up to 1 for the strongest.
  double intensity = 0.0;
};

struct RidgeRow {
  std::string label;
  std::vector<RidgeLayer> layers;
};

struct RidgeColumn {
  std::string title;
  std::vector<RidgeRow> rows;
};

/// Histogram silhouettes stacked per row and column, drawn directly from the
/// bin counts.
std::string ridge_chart(const std::string& title, const std::vector<RidgeColumn>& columns);

/// Escapes text for use inside SVG element content or attributes.
std::string escape(const std::string& text);

}  // namespace htsr::svg
