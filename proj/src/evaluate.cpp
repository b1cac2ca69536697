#include "htsr/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "htsr/csv.hpp"
#include "htsr/error.hpp"

namespace htsr {

std::string version_label(int version) { return version == kOrigVersion ? "orig" : fmt::format("v{}", version); }

int parse_version_label(std::string_view label) {
  if (label == "orig") return kOrigVersion;
  if (label.size() < 2 || label.front() != 'v') throw ParseError(fmt::format("bad version label '{}'", label));
  const auto v = csv::parse_int(label.substr(1), "version");
  if (v < 0) throw ParseError(fmt::format("bad version label '{}'", label));
  return static_cast<int>(v);
}

std::vector<std::string> level_names(const GroupSchema& schema) {
  std::vector<std::string> out{"bottom"};
  for (const auto& d : schema.dimensions()) out.push_back("group:" + d);
  out.emplace_back("top");
  return out;
}

double naive_scale(std::span<const double> train) {
  if (train.size() < 2) throw PreconditionError("MASE needs a training series of length >= 2");
  double sum = 0.0;
  for (std::size_t t = 1; t < train.size(); ++t) sum += std::abs(train[t] - train[t - 1]);
  return sum / static_cast<double>(train.size() - 1);
}

double mase_series(std::span<const double> actual, std::span<const double> forecast, std::span<const double> train) {
  if (actual.empty()) throw PreconditionError("MASE needs at least one horizon step");
  if (actual.size() != forecast.size()) {
    throw DimensionError(fmt::format("actual has {} steps, forecast has {}", actual.size(), forecast.size()));
  }
  const double scale = naive_scale(train);
  if (!(scale > 0.0)) throw UndefinedScaleError("training series is constant; MASE is undefined");
  double err = 0.0;
  for (std::size_t h = 0; h < actual.size(); ++h) err += std::abs(forecast[h] - actual[h]);
  return err / static_cast<double>(actual.size()) / scale;
}

namespace {

struct SplitValues {
  std::vector<std::vector<double>> train;
  std::vector<std::vector<double>> test;
};

SplitValues split_values(const ForecastRun& run, const HtsDataset& dataset) {
  const auto [train, test] = split(dataset, run.horizon);
  if (run.nodes != dataset.structure().nodes()) throw DimensionError("forecast run does not match dataset nodes");
  return {aggregate_all(train), aggregate_all(test)};
}

// Mean MASE over `nodes`, skipping constant training series.
std::optional<double> mean_mase(const ForecastRun& run, const SplitValues& v, std::span<const std::size_t> nodes,
                                std::vector<Exclusion>* excluded) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto i : nodes) {
    try {
      sum += mase_series(v.test[i], run.forecasts[i], v.train[i]);
      ++count;
    } catch (const UndefinedScaleError& e) {
      if (excluded) excluded->push_back({run.nodes[i].label(), e.what()});
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

}  // namespace

double mase_group(const ForecastRun& run, const HtsDataset& dataset, std::string_view dimension,
                  std::vector<Exclusion>* excluded) {
  const auto values = split_values(run, dataset);
  const auto nodes = dataset.structure().dimension_nodes(dimension);
  const auto m = mean_mase(run, values, nodes, excluded);
  if (!m) throw UndefinedScaleError(fmt::format("every element of dimension '{}' has a constant training series",
                                                dimension));
  return *m;
}

Evaluation evaluate_run(const ForecastRun& run, const HtsDataset& dataset, const VariantTag& tag) {
  if (run.horizon == 0 || run.horizon >= dataset.length()) {
    throw PreconditionError(fmt::format("run horizon {} does not fit dataset length {}", run.horizon,
                                        dataset.length()));
  }
  const auto values = split_values(run, dataset);
  const auto& structure = dataset.structure();
  Evaluation out;

  const auto emit = [&](std::string level, std::span<const std::size_t> nodes) {
    const auto m = mean_mase(run, values, nodes, &out.excluded);
    if (!m) {
      out.excluded.push_back({level, "no node with a usable scale"});
      return;
    }
    out.records.push_back({dataset.name(), tag.transformation, tag.version, tag.sample, run.method,
                           std::move(level), *m});
  };

  std::vector<std::size_t> bottom(structure.num_bottom());
  std::iota(bottom.begin(), bottom.end(), structure.bottom_offset());
  emit("bottom", bottom);
  for (const auto& d : dataset.schema().dimensions()) emit("group:" + d, structure.dimension_nodes(d));
  const std::size_t top = structure.index_of(NodeId::top());
  emit("top", std::span<const std::size_t>(&top, 1));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CurvePoint> robustness_curve(std::span<const EvalRecord> records, std::string_view dataset,
                                         std::string_view transformation, std::string_view method,
                                         std::string_view level, int num_versions) {
  std::map<int, std::vector<double>> by_version;
  for (const auto& r : records) {
    if (r.dataset != dataset || r.method != method || r.level != level) continue;
    if (r.transformation == "orig" || r.transformation == transformation) by_version[r.version].push_back(r.mase);
  }
  if (by_version.empty()) {
    throw LookupError(fmt::format("no records for dataset '{}', method '{}', level '{}'", dataset, method, level));
  }
  std::vector<CurvePoint> curve;
  for (int v = kOrigVersion; v < num_versions; ++v) {
    CurvePoint p;
    p.version = v;
    const auto it = by_version.find(v);
    if (it == by_version.end()) {
      p.missing = true;
    } else {
      const auto& xs = it->second;
      p.samples = xs.size();
      p.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      double ss = 0.0;
      for (const double x : xs) ss += (x - p.mean) * (x - p.mean);
      p.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    }
    curve.push_back(p);
  }
  return curve;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("spearman needs two equal-length samples (n >= 2)");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

RankTable rank_methods(std::span<const EvalRecord> records, std::string_view dataset, std::string_view transformation,
                       int version, std::string_view level, std::span<const std::string> methods) {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    if (r.dataset == dataset && r.transformation == transformation && r.version == version && r.level == level) {
      auto& [sum, count] = sums[r.method];
      sum += r.mase;
      ++count;
    }
  }
  std::vector<std::string> missing;
  for (const auto& m : methods) {
    if (!sums.contains(m)) missing.push_back(m);
  }
  if (!missing.empty()) {
    throw LookupError(fmt::format("no records for method(s) {} at {}/{}/{}/{}", fmt::join(missing, ", "), dataset,
                                  transformation, version_label(version), level));
  }
  if (sums.empty()) {
    throw LookupError(fmt::format("no records at {}/{}/{}/{}", dataset, transformation, version_label(version), level));
  }
  std::vector<std::string> names;
  std::vector<double> means;
  for (const auto& [name, sc] : sums) {
    names.push_back(name);
    means.push_back(sc.first / static_cast<double>(sc.second));
  }
  const auto ranks = average_ranks(means);
  RankTable table{std::string(dataset), std::string(transformation), version, std::string(level), {}};
  for (std::size_t i = 0; i < names.size(); ++i) table.ranks[names[i]] = ranks[i];
  return table;
}

AggregatedRanks aggregate_ranks(std::span<const RankTable> tables) {
  if (tables.empty()) throw PreconditionError("aggregate_ranks needs at least one table");
  std::map<std::pair<std::string, int>, std::map<std::string, std::pair<double, std::size_t>>> acc;
  for (const auto& t : tables) {
    auto& bucket = acc[{t.transformation, t.version}];
    for (const auto& [method, rank] : t.ranks) {
      bucket[method].first += rank;
      ++bucket[method].second;
    }
  }
  AggregatedRanks out;
  for (const auto& [key, methods] : acc) {
    for (const auto& [method, sc] : methods) out[key][method] = sc.first / static_cast<double>(sc.second);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string results_csv(std::span<const EvalRecord> records) {
  std::string out = "dataset,transformation,version,sample,method,level,mase\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.dataset, r.transformation, version_label(r.version), r.sample,
                       r.method, r.level, csv::format_double(r.mase));
  }
  return out;
}

std::vector<EvalRecord> parse_results_csv(std::string_view text) {
  const auto table = csv::parse(text, "results");
  const auto c_dataset = table.column("dataset");
  const auto c_transformation = table.column("transformation");
  const auto c_version = table.column("version");
  const auto c_sample = table.column("sample");
  const auto c_method = table.column("method");
  const auto c_level = table.column("level");
  const auto c_mase = table.column("mase");
  std::vector<EvalRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    out.push_back({row[c_dataset], row[c_transformation], parse_version_label(row[c_version]),
                   static_cast<int>(csv::parse_int(row[c_sample], "sample")), row[c_method], row[c_level],
                   csv::parse_double(row[c_mase], "mase")});
  }
  return out;
}

std::string ranks_csv(std::span<const RankTable> tables, bool with_level) {
  std::string out = with_level ? "dataset,transformation,version,level,method,rank\n"
                               : "dataset,transformation,version,method,rank\n";
  for (const auto& t : tables) {
    for (const auto& [method, rank] : t.ranks) {
      if (with_level) {
        out += fmt::format("{},{},{},{},{},{}\n", t.dataset, t.transformation, version_label(t.version), t.level,
                           method, csv::format_double(rank));
      } else {
        out += fmt::format("{},{},{},{},{}\n", t.dataset, t.transformation, version_label(t.version), method,
                           csv::format_double(rank));
      }
    }
  }
  return out;
}

std::string aggregated_ranks_csv(const AggregatedRanks& ranks) {
  std::string out = "transformation,version,method,mean_rank\n";
  for (const auto& [key, methods] : ranks) {
    for (const auto& [method, rank] : methods) {
      out += fmt::format("{},{},{},{}\n", key.first, version_label(key.second), method, csv::format_double(rank));
    }
  }
  return out;
}

std::string level_table_csv(std::span<const EvalRecord> records, const GroupSchema& schema) {
  std::vector<std::string> columns{"bottom"};
  std::string out = "dataset,method,Bottom";
  for (const auto& d : schema.dimensions()) {
    columns.push_back("group:" + d);
    out += "," + d;
  }
  columns.emplace_back("top");
  out += ",Top\n";

  // (dataset, method) in first-seen order; cells averaged over samples.
  std::vector<std::pair<std::string, std::string>> rows;
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::pair<double, std::size_t>>> cells;
  for (const auto& r : records) {
    if (r.transformation != "orig") continue;
    const auto key = std::make_pair(r.dataset, r.method);
    if (!cells.contains(key)) rows.push_back(key);
    auto& [sum, count] = cells[key][r.level];
    sum += r.mase;
    ++count;
  }
  for (const auto& key : rows) {
    out += key.first + "," + key.second;
    const auto& levels = cells[key];
    for (const auto& c : columns) {
      const auto it = levels.find(c);
      out += ",";
      if (it != levels.end()) out += fmt::format("{:.2f}", it->second.first / static_cast<double>(it->second.second));
    }
    out += '\n';
  }
  return out;
}

}  // namespace htsr
