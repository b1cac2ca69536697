#include "htsr/report.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "htsr/csv.hpp"
#include "htsr/error.hpp"
#include "htsr/svg.hpp"

namespace htsr {

namespace fs = std::filesystem;

namespace {

// Orig sorts before every transformation; then by name and version.
bool variant_less(const std::string& ta, int va, const std::string& tb, int vb) {
  const bool oa = ta == "orig";
  const bool ob = tb == "orig";
  if (oa != ob) return oa;
  return std::tie(ta, va) < std::tie(tb, vb);
}

std::vector<std::string> datasets_in(std::span<const EvalRecord> records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.dataset) == out.end()) out.push_back(r.dataset);
  }
  return out;
}

std::vector<std::string> methods_of(std::span<const EvalRecord> records, std::string_view dataset) {
  std::set<std::string> out;
  for (const auto& r : records) {
    if (r.dataset == dataset) out.insert(r.method);
  }
  return {out.begin(), out.end()};
}

int num_versions_of(std::span<const EvalRecord> records, std::string_view dataset) {
  int n = 0;
  for (const auto& r : records) {
    if (r.dataset == dataset) n = std::max(n, r.version + 1);
  }
  return n;
}

std::string axis_label(const std::string& transformation, int version) {
  return transformation == "orig" ? "orig" : fmt::format("{} {}", transformation, version_label(version));
}

}  // namespace

std::string distances_csv(std::span<const DistanceEntry> entries) {
  std::string out = "dataset,transformation,version,pair_a,pair_b,dtw\n";
  for (const auto& e : entries) {
    for (const auto& p : e.distribution.pairs) {
      out += fmt::format("{},{},{},{},{},{}\n", e.dataset, e.variant.transformation, version_label(e.variant.version),
                         p.a, p.b, csv::format_double(p.distance));
    }
  }
  return out;
}

std::vector<DistanceSummaryRow> summarize_distances(std::span<const DistanceEntry> entries, std::size_t bins) {
  std::map<std::string, std::pair<double, double>> range;
  for (const auto& e : entries) {
    if (e.distribution.values.empty()) continue;
    auto [it, inserted] = range.try_emplace(e.dataset, e.distribution.min(), e.distribution.max());
    if (!inserted) {
      it->second.first = std::min(it->second.first, e.distribution.min());
      it->second.second = std::max(it->second.second, e.distribution.max());
    }
  }
  std::vector<DistanceSummaryRow> out;
  for (const auto& e : entries) {
    if (e.distribution.values.empty()) continue;
    const auto [lo, hi] = range.at(e.dataset);
    const auto h = e.distribution.histogram(lo, hi, bins);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      out.push_back({e.dataset, e.variant.transformation, e.variant.version, e.distribution.mean, e.distribution.sd,
                     h.edges[b], h.edges[b + 1], h.counts[b]});
    }
  }
  return out;
}

std::string distance_summary_csv(std::span<const DistanceSummaryRow> rows) {
  std::string out = "dataset,transformation,version,mean,sd,bin_lo,bin_hi,count\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.dataset, r.transformation, version_label(r.version),
                       csv::format_double(r.mean), csv::format_double(r.sd), csv::format_double(r.bin_lo),
                       csv::format_double(r.bin_hi), r.count);
  }
  return out;
}

std::vector<DistanceSummaryRow> parse_distance_summary_csv(std::string_view text) {
  const auto table = csv::parse(text, "distance summary");
  const auto c_dataset = table.column("dataset");
  const auto c_transformation = table.column("transformation");
  const auto c_version = table.column("version");
  const auto c_mean = table.column("mean");
  const auto c_sd = table.column("sd");
  const auto c_lo = table.column("bin_lo");
  const auto c_hi = table.column("bin_hi");
  const auto c_count = table.column("count");
  std::vector<DistanceSummaryRow> out;
  for (const auto& row : table.rows) {
    const auto count = csv::parse_int(row[c_count], "count");
    if (count < 0) throw ParseError(fmt::format("negative bin count {}", count));
    out.push_back({row[c_dataset], row[c_transformation], parse_version_label(row[c_version]),
                   csv::parse_double(row[c_mean], "mean"), csv::parse_double(row[c_sd], "sd"),
                   csv::parse_double(row[c_lo], "bin_lo"), csv::parse_double(row[c_hi], "bin_hi"),
                   static_cast<std::size_t>(count)});
  }
  return out;
}

std::vector<RankTable> rank_all(std::span<const EvalRecord> records, std::string_view level) {
  std::vector<RankTable> out;
  for (const auto& dataset : datasets_in(records)) {
    const auto methods = methods_of(records, dataset);
    std::vector<std::pair<std::string, int>> keys;
    for (const auto& r : records) {
      if (r.dataset != dataset || r.level != level) continue;
      const std::pair<std::string, int> key{r.transformation, r.version};
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end(),
              [](const auto& a, const auto& b) { return variant_less(a.first, a.second, b.first, b.second); });
    for (const auto& [transformation, version] : keys) {
      try {
        out.push_back(rank_methods(records, dataset, transformation, version, level, methods));
      } catch (const LookupError& e) {
        std::cerr << "skipping ranks: " << e.what() << '\n';
      }
    }
  }
  return out;
}

std::vector<RankTable> rank_all_levels(std::span<const EvalRecord> records) {
  std::vector<std::string> levels;
  for (const auto& r : records) {
    if (std::find(levels.begin(), levels.end(), r.level) == levels.end()) levels.push_back(r.level);
  }
  std::vector<RankTable> out;
  for (const auto& level : levels) {
    auto tables = rank_all(records, level);
    out.insert(out.end(), std::make_move_iterator(tables.begin()), std::make_move_iterator(tables.end()));
  }
  return out;
}

void write_rank_files(std::span<const EvalRecord> records, const fs::path& directory) {
  const auto top = rank_all(records, "top");
  csv::write_atomic(directory / "ranks.csv", ranks_csv(top));
  csv::write_atomic(directory / "ranks_by_level.csv", ranks_csv(rank_all_levels(records), true));
  csv::write_atomic(directory / "ranks_aggregated.csv",
                    top.empty() ? aggregated_ranks_csv({}) : aggregated_ranks_csv(aggregate_ranks(top)));
}

std::string line_chart_svg(std::span<const EvalRecord> records, std::string_view dataset) {
  const auto methods = methods_of(records, dataset);
  std::set<std::string> transformations;
  std::vector<std::string> levels;
  for (const auto& r : records) {
    if (r.dataset != dataset) continue;
    if (r.transformation != "orig") transformations.insert(r.transformation);
    if (std::find(levels.begin(), levels.end(), r.level) == levels.end()) levels.push_back(r.level);
  }
  if (methods.empty() || transformations.empty()) {
    throw LookupError(fmt::format("no transformed records for dataset '{}'", dataset));
  }
  const int n = num_versions_of(records, dataset);
  std::vector<std::string> x_labels{"orig"};
  for (int v = 0; v < n; ++v) x_labels.push_back(version_label(v));

  std::vector<std::vector<svg::LinePanel>> grid;
  for (const auto& method : methods) {
    auto& row = grid.emplace_back();
    for (const auto& transformation : transformations) {
      svg::LinePanel panel{fmt::format("{} / {}", method, transformation), {}};
      for (const auto& level : levels) {
        svg::LineSeries line{level, {}};
        for (const auto& p : robustness_curve(records, dataset, transformation, method, level, n)) {
          line.y.push_back(p.missing ? std::nullopt : std::optional<double>(p.mean));
        }
        panel.lines.push_back(std::move(line));
      }
      row.push_back(std::move(panel));
    }
  }
  return svg::line_chart(fmt::format("MASE by transformation intensity: {}", dataset), x_labels, grid, "MASE");
}

std::string radar_chart_svg(std::span<const EvalRecord> records, std::string_view dataset,
                            std::string_view transformation) {
  const auto methods = methods_of(records, dataset);
  const int n = num_versions_of(records, dataset);
  std::vector<std::string> axes{"orig"};
  std::vector<RankTable> tables{rank_methods(records, dataset, "orig", kOrigVersion, "top", methods)};
  for (int v = 0; v < n; ++v) {
    axes.push_back(version_label(v));
    tables.push_back(rank_methods(records, dataset, transformation, v, "top", methods));
  }
  std::vector<svg::RadarSeries> series;
  for (const auto& m : methods) {
    svg::RadarSeries s{m, {}};
    for (const auto& t : tables) s.values.push_back(t.ranks.at(m));
    series.push_back(std::move(s));
  }
  return svg::radar_chart(fmt::format("Method ranks under {}: {}", transformation, dataset), axes, series,
                          static_cast<double>(methods.size()));
}

std::string aggregated_radar_svg(std::span<const EvalRecord> records) {
  const auto tables = rank_all(records, "top");
  if (tables.empty()) throw LookupError("no complete rank tables to aggregate");
  const auto aggregated = aggregate_ranks(tables);
  std::vector<std::pair<std::string, int>> keys;
  std::set<std::string> methods;
  for (const auto& [key, ranks] : aggregated) {
    keys.push_back(key);
    for (const auto& [m, r] : ranks) methods.insert(m);
  }
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return variant_less(a.first, a.second, b.first, b.second); });
  std::vector<std::string> axes;
  for (const auto& [t, v] : keys) axes.push_back(axis_label(t, v));
  std::vector<svg::RadarSeries> series;
  for (const auto& m : methods) {
    svg::RadarSeries s{m, {}};
    for (const auto& key : keys) {
      const auto& ranks = aggregated.at(key);
      const auto it = ranks.find(m);
      s.values.push_back(it == ranks.end() ? static_cast<double>(methods.size()) : it->second);
    }
    series.push_back(std::move(s));
  }
  return svg::radar_chart("Mean method ranks across datasets", axes, series, static_cast<double>(methods.size()));
}

std::string ridge_chart_svg(std::span<const DistanceSummaryRow> rows) {
  if (rows.empty()) throw PreconditionError("ridge chart needs distance summaries");
  using Key = std::tuple<std::string, std::string, int>;
  std::vector<std::string> datasets;
  std::map<std::string, std::set<std::string>> transformations;
  std::map<std::string, int> versions;
  std::map<Key, svg::RidgeLayer> layers;
  for (const auto& r : rows) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    if (r.transformation != "orig") transformations[r.dataset].insert(r.transformation);
    versions[r.dataset] = std::max(versions[r.dataset], r.version + 1);
    auto& layer = layers[{r.dataset, r.transformation, r.version}];
    if (layer.edges.empty()) layer.edges.push_back(r.bin_lo);
    layer.edges.push_back(r.bin_hi);
    layer.counts.push_back(r.count);
  }

  std::vector<svg::RidgeColumn> columns;
  for (const auto& dataset : datasets) {
    svg::RidgeColumn column{dataset, {}};
    const auto orig = layers.find({dataset, "orig", kOrigVersion});
    std::vector<std::string> row_names(transformations[dataset].begin(), transformations[dataset].end());
    if (row_names.empty()) row_names.emplace_back("orig");
    const int n = versions[dataset];
    for (const auto& t : row_names) {
      svg::RidgeRow row{t, {}};
      if (orig != layers.end()) {
        auto layer = orig->second;
        layer.label = "orig";
        layer.original = true;
        row.layers.push_back(std::move(layer));
      }
      for (int v = 0; v < n; ++v) {
        const auto it = layers.find({dataset, t, v});
        if (it == layers.end()) continue;
        auto layer = it->second;
        layer.label = version_label(v);
        layer.intensity = n > 1 ? static_cast<double>(v) / static_cast<double>(n - 1) : 0.0;
        row.layers.push_back(std::move(layer));
      }
      column.rows.push_back(std::move(row));
    }
    columns.push_back(std::move(column));
  }
  return svg::ridge_chart("Pairwise DTW distance distributions", columns);
}

std::vector<fs::path> write_plots(const fs::path& directory) {
  const auto results_path = directory / "results.csv";
  const auto summary_path = directory / "distance_summary.csv";
  if (!fs::exists(results_path)) throw IoError(fmt::format("missing {}", results_path.string()));
  const auto records = parse_results_csv(csv::read_file(results_path));
  const auto plots = directory / "plots";
  std::vector<fs::path> written;
  const auto emit = [&](const std::string& name, const std::string& content) {
    csv::write_atomic(plots / name, content);
    written.push_back(plots / name);
  };

  for (const auto& dataset : datasets_in(records)) {
    emit(fmt::format("lines_{}.svg", dataset), line_chart_svg(records, dataset));
    std::set<std::string> transformations;
    for (const auto& r : records) {
      if (r.dataset == dataset && r.transformation != "orig") transformations.insert(r.transformation);
    }
    for (const auto& t : transformations) {
      emit(fmt::format("radar_{}_{}.svg", dataset, t), radar_chart_svg(records, dataset, t));
    }
  }
  emit("radar_aggregated.svg", aggregated_radar_svg(records));

  if (fs::exists(summary_path)) {
    const auto rows = parse_distance_summary_csv(csv::read_file(summary_path));
    if (!rows.empty()) {
      emit("ridge_data.csv", distance_summary_csv(rows));
      emit("ridge.svg", ridge_chart_svg(rows));
    }
  }
  return written;
}

}  // namespace htsr
