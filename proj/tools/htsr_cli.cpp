#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "htsr/config.hpp"
#include "htsr/csv.hpp"
#include "htsr/error.hpp"
#include "htsr/experiment.hpp"
#include "htsr/report.hpp"
#include "htsr/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kConfigFailure = 1, kPartialFailure = 2, kIoFailure = 3 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  unsigned jobs = 1;
};

htsr::ExperimentConfig require_config(const Globals& g) {
  if (g.config.empty()) throw htsr::ConfigError("--config is required for this command");
  htsr::RunOptions options;
  options.seed_override = g.seed;
  return htsr::effective_config(htsr::load_config(g.config), options);
}

int cmd_validate(const Globals& g) {
  const auto config = require_config(g);
  htsr::validate(config);
  for (const auto& d : config.datasets) {
    const auto data = htsr::load_configured_dataset(config, d);
    fmt::print("dataset {}: {} series x {} steps, {} nodes\n", data.name(), data.num_series(), data.length(),
               data.structure().num_nodes());
  }
  fmt::print("config ok, hash {}, {} evaluation cells\n", config.hash(), htsr::count_evaluation_cells(config));
  return kOk;
}

int cmd_transform(const Globals& g, const std::string& out) {
  const auto config = require_config(g);
  htsr::validate(config);
  const fs::path dir = out.empty() ? htsr::experiment_directory(config) / "variants" : fs::path(out);
  const auto n = htsr::write_variants(config, dir);
  fmt::print("wrote {} files to {}\n", n, dir.string());
  return kOk;
}

int cmd_distances(const Globals& g, const std::string& out) {
  const auto config = require_config(g);
  htsr::validate(config);
  const fs::path dir = out.empty() ? htsr::experiment_directory(config) : fs::path(out);
  std::vector<htsr::DistanceEntry> entries;
  for (const auto& d : config.datasets) {
    const auto data = htsr::load_configured_dataset(config, d);
    for (auto& [tag, dist] : htsr::distance_distributions(config, data)) {
      entries.push_back({data.name(), tag, std::move(dist)});
    }
  }
  htsr::csv::write_atomic(dir / "distances.csv", htsr::distances_csv(entries));
  const auto summary = htsr::summarize_distances(entries);
  htsr::csv::write_atomic(dir / "distance_summary.csv", htsr::distance_summary_csv(summary));
  for (const auto& e : entries) {
    fmt::print("{} {} {}: mean {:.4f} sd {:.4f} ({} pairs)\n", e.dataset, e.variant.transformation,
               htsr::version_label(e.variant.version), e.distribution.mean, e.distribution.sd,
               e.distribution.values.size());
  }
  return kOk;
}

int cmd_run(const Globals& g, std::optional<std::size_t> stop_after, bool plots) {
  const auto config = require_config(g);
  htsr::RunOptions options;
  options.resume = g.resume;
  options.jobs = g.jobs;
  options.stop_after_cells = stop_after;
  const auto result = htsr::run_experiment(config, options);
  const auto& m = result.manifest;
  fmt::print("{}: {} done, {} failed, {} pending\n", result.directory.string(), m.count(htsr::CellStatus::Done),
             m.count(htsr::CellStatus::Failed), m.count(htsr::CellStatus::Pending));
  if (result.interrupted) {
    fmt::print("stopped early; rerun with --resume to continue\n");
    return kOk;
  }
  if (plots) {
    try {
      htsr::write_plots(result.directory);
    } catch (const htsr::IoError&) {
      throw;
    } catch (const htsr::Error& e) {
      std::cerr << "plots skipped: " << e.what() << '\n';
    }
  }
  return m.count(htsr::CellStatus::Failed) > 0 ? kPartialFailure : kOk;
}

fs::path result_directory(const Globals& g, const std::string& dir) {
  if (!dir.empty()) return dir;
  return htsr::experiment_directory(require_config(g));
}

int cmd_rank(const Globals& g, const std::string& dir_arg, const std::string& level) {
  const auto dir = result_directory(g, dir_arg);
  const auto records = htsr::parse_results_csv(htsr::csv::read_file(dir / "results.csv"));
  htsr::write_rank_files(records, dir);
  const auto tables = htsr::rank_all(records, level);
  std::cout << htsr::ranks_csv(tables);
  return kOk;
}

int cmd_plot(const Globals& g, const std::string& dir_arg) {
  const auto dir = result_directory(g, dir_arg);
  for (const auto& p : htsr::write_plots(dir)) fmt::print("{}\n", p.string());
  return kOk;
}

int cmd_synth(const Globals& g, const std::string& out, std::size_t length) {
  htsr::SyntheticSpec spec;
  if (g.seed) spec.seed = *g.seed;
  spec.length = length;
  const auto data = htsr::make_synthetic(spec);
  const fs::path dir = out;
  htsr::csv::write_atomic(dir / "data.csv", htsr::to_data_csv(data));
  htsr::csv::write_atomic(dir / "schema.csv", htsr::to_schema_csv(data.schema()));
  fmt::print("wrote {} series of length {} to {}\n", data.num_series(), data.length(), dir.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness evaluation of hierarchical forecasting methods under data transformations"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Override the config's master seed");
  app.add_flag("--resume", g.resume, "Skip cells already completed in the output directory");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  std::string out;
  std::string dir;
  std::string level = "top";
  std::optional<std::size_t> stop_after;
  bool no_plots = false;
  std::size_t length = 120;

  auto* validate = app.add_subcommand("validate", "Check a config and its datasets");
  auto* transform = app.add_subcommand("transform", "Write every transformed variant as CSV");
  transform->add_option("--out", out, "Output directory (default: <experiment>/variants)");
  auto* distances = app.add_subcommand("distances", "Compute pairwise DTW distance distributions");
  distances->add_option("--out", out, "Output directory (default: experiment directory)");
  auto* run = app.add_subcommand("run", "Run the full evaluation");
  run->add_option("--stop-after", stop_after, "Stop after this many cells (for testing resume)");
  run->add_flag("--no-plots", no_plots, "Do not write charts");
  auto* rank = app.add_subcommand("rank", "Recompute rank tables from results.csv");
  rank->add_option("--dir", dir, "Experiment directory (default: from --config)");
  rank->add_option("--level", level, "Level to print: top, bottom or group:<dimension>");
  auto* plot = app.add_subcommand("plot", "Write SVG charts for an experiment directory");
  plot->add_option("--dir", dir, "Experiment directory (default: from --config)");
  auto* synth = app.add_subcommand("synth", "Write a synthetic grouped dataset");
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--length", length, "Series length")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*validate) return cmd_validate(g);
    if (*transform) return cmd_transform(g, out);
    if (*distances) return cmd_distances(g, out);
    if (*run) return cmd_run(g, stop_after, !no_plots);
    if (*rank) return cmd_rank(g, dir, level);
    if (*plot) return cmd_plot(g, dir);
    if (*synth) return cmd_synth(g, out, length);
  } catch (const htsr::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  }
  return kOk;
}
