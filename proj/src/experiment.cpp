#include "htsr/experiment.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "htsr/csv.hpp"
#include "htsr/error.hpp"
#include "htsr/report.hpp"

namespace htsr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(CellStatus status) {
  switch (status) {
    case CellStatus::Pending:
      return "pending";
    case CellStatus::Done:
      return "done";
    case CellStatus::Failed:
      return "failed";
  }
  return "unknown";
}

std::size_t RunManifest::count(CellStatus status) const {
  std::size_t n = 0;
  for (const auto& [key, cell] : cells) n += cell.status == status ? 1 : 0;
  return n;
}

std::string RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["tool_version"] = tool_version;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["elapsed_seconds"] = elapsed_seconds;
  j["summary"] = {{"pending", count(CellStatus::Pending)},
                  {"done", count(CellStatus::Done)},
                  {"failed", count(CellStatus::Failed)}};
  json c = json::object();
  for (const auto& [key, cell] : cells) {
    json e{{"status", std::string(to_string(cell.status))}, {"seconds", cell.seconds}};
    if (!cell.reason.empty()) e["reason"] = cell.reason;
    c[key] = std::move(e);
  }
  j["cells"] = std::move(c);
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
  RunManifest m;
  try {
    const auto j = json::parse(text);
    m.config_hash = j.value("config_hash", "");
    m.tool_version = j.value("tool_version", "");
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    m.elapsed_seconds = j.value("elapsed_seconds", 0.0);
    for (const auto& [key, e] : j.at("cells").items()) {
      CellState cell;
      const auto status = e.value("status", "pending");
      cell.status = status == "done" ? CellStatus::Done : status == "failed" ? CellStatus::Failed : CellStatus::Pending;
      cell.reason = e.value("reason", "");
      cell.seconds = e.value("seconds", 0.0);
      m.cells.emplace(key, std::move(cell));
    }
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("invalid manifest: {}", e.what()));
  }
  return m;
}

fs::path experiment_directory(const ExperimentConfig& config) { return config.output_dir / config.hash(); }

ExperimentConfig effective_config(ExperimentConfig config, const RunOptions& options) {
  if (options.seed_override) config.master_seed = *options.seed_override;
  return config;
}

std::size_t count_evaluation_cells(const ExperimentConfig& config) {
  const auto& t = config.transformations;
  const std::size_t variants = t.kinds.size() * static_cast<std::size_t>(t.num_versions * t.num_samples);
  return config.datasets.size() * config.methods.size() * (1 + variants);
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string variant_label(const VariantTag& tag) {
  if (tag.is_orig()) return "orig";
  return fmt::format("{}/v{}/s{}", tag.transformation, tag.version, tag.sample);
}

std::string variant_stem(const std::string& dataset, const VariantTag& tag) {
  if (tag.is_orig()) return dataset + "__orig";
  return fmt::format("{}__{}__v{}__s{}", dataset, tag.transformation, tag.version, tag.sample);
}

std::string cell_key(const std::string& dataset, const VariantTag& tag, const std::string& method) {
  return fmt::format("{}|{}|{}", dataset, variant_label(tag), method);
}

constexpr std::string_view kDistanceCell = "distance";

struct Task {
  std::size_t dataset = 0;
  std::optional<VariantKey> variant;

  VariantTag tag() const { return variant ? VariantTag::of(*variant) : VariantTag::orig(); }
};

bool wants_distance(const ExperimentConfig& config, const VariantTag& tag) {
  return tag.is_orig() || tag.sample == 0 || config.distance.all_samples;
}

std::string exclusions_csv_header() { return "dataset,transformation,version,sample,method,node,reason\n"; }

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::vector<DistancePair> parse_pairs(std::string_view text) {
  const auto table = csv::parse(text, "distance cell");
  const auto a = table.column("pair_a");
  const auto b = table.column("pair_b");
  const auto d = table.column("dtw");
  std::vector<DistancePair> out;
  for (const auto& row : table.rows) out.push_back({row[a], row[b], csv::parse_double(row[d], "dtw")});
  return out;
}

PairwiseOptions pairwise_options(const ExperimentConfig& config) {
  return {config.distance.dtw, config.distance.normalize};
}

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunOptions& options)
      : config_(config), options_(options), dir_(experiment_directory(config)), cells_dir_(dir_ / "cells") {}

  RunResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& dc : config_.datasets) datasets_.push_back(load_configured_dataset(config_, dc));
    build_tasks();
    prepare_directory();

    const unsigned jobs = std::max(1u, options_.jobs);
    {
      std::vector<std::jthread> workers;
      for (unsigned w = 0; w < jobs; ++w) workers.emplace_back([this] { work(); });
    }
    if (error_) std::rethrow_exception(error_);

    RunResult result;
    result.directory = dir_;
    result.interrupted = stop_.load();
    if (!result.interrupted) aggregate();
    manifest_.elapsed_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!result.interrupted) manifest_.finished_at = utc_now();
    save_manifest();
    result.manifest = manifest_;
    return result;
  }

 private:
  void build_tasks() {
    const auto plan = config_.plan();
    for (std::size_t d = 0; d < datasets_.size(); ++d) {
      tasks_.push_back({d, std::nullopt});
      for (const auto& key : enumerate_variants(datasets_[d], plan)) tasks_.push_back({d, key});
    }
  }

  std::vector<std::string> task_cells(const Task& task) const {
    std::vector<std::string> out;
    const auto& name = datasets_[task.dataset].name();
    const auto tag = task.tag();
    for (const auto& m : config_.methods) out.push_back(cell_key(name, tag, m.id));
    if (wants_distance(config_, tag)) out.push_back(cell_key(name, tag, std::string(kDistanceCell)));
    return out;
  }

  fs::path cell_file(const std::string& dataset, const VariantTag& tag, std::string_view method) const {
    return cells_dir_ / fmt::format("{}__{}.csv", variant_stem(dataset, tag), method);
  }

  fs::path exclusion_file(const std::string& dataset, const VariantTag& tag, std::string_view method) const {
    return cells_dir_ / fmt::format("{}__{}.excluded.csv", variant_stem(dataset, tag), method);
  }

  void prepare_directory() {
    const auto manifest_path = dir_ / "manifest.json";
    bool resumed = false;
    if (options_.resume && fs::exists(manifest_path)) {
      auto previous = RunManifest::from_json(csv::read_file(manifest_path));
      if (previous.config_hash == config_.hash()) {
        manifest_ = std::move(previous);
        resumed = true;
      }
    }
    if (!resumed) {
      std::error_code ec;
      fs::remove_all(cells_dir_, ec);
      manifest_ = RunManifest{};
      manifest_.config_hash = config_.hash();
      manifest_.started_at = utc_now();
    }
    manifest_.tool_version = std::string(kToolVersion);
    manifest_.finished_at.clear();
    fs::create_directories(cells_dir_);
    fs::create_directories(dir_);
    // Keep only done cells whose staging file survived; everything else is redone.
    std::map<std::string, CellState> cells;
    for (const auto& task : tasks_) {
      const auto& name = datasets_[task.dataset].name();
      const auto tag = task.tag();
      std::vector<std::pair<std::string, std::string>> keys;
      for (const auto& m : config_.methods) keys.emplace_back(cell_key(name, tag, m.id), m.id);
      if (wants_distance(config_, tag)) keys.emplace_back(cell_key(name, tag, std::string(kDistanceCell)), kDistanceCell);
      for (const auto& [key, method] : keys) {
        CellState state;
        const auto it = manifest_.cells.find(key);
        if (it != manifest_.cells.end() && it->second.status == CellStatus::Done &&
            fs::exists(cell_file(name, tag, method))) {
          state = it->second;
        }
        cells.emplace(key, state);
      }
    }
    manifest_.cells = std::move(cells);
    config_json_ = config_.canonical_json();
    csv::write_atomic(dir_ / "config.json", config_json_ + "\n");
    save_manifest();
  }

  void save_manifest() { csv::write_atomic(dir_ / "manifest.json", manifest_.to_json()); }

  bool is_done(const std::string& key) {
    std::lock_guard lock(mutex_);
    return manifest_.cells.at(key).status == CellStatus::Done;
  }

  void finish_cell(const std::string& key, CellState state) {
    std::lock_guard lock(mutex_);
    manifest_.cells[key] = std::move(state);
    save_manifest();
    ++completed_;
    if (options_.stop_after_cells && completed_ >= *options_.stop_after_cells) stop_ = true;
  }

  void work() {
    try {
      while (!stop_) {
        const auto i = next_.fetch_add(1);
        if (i >= tasks_.size()) return;
        run_task(tasks_[i]);
      }
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      stop_ = true;
    }
  }

  void run_task(const Task& task) {
    const auto& source = datasets_[task.dataset];
    const auto& dc = config_.datasets[task.dataset];
    const auto tag = task.tag();

    bool pending = false;
    for (const auto& key : task_cells(task)) pending = pending || !is_done(key);
    if (!pending) return;

    std::optional<HtsDataset> variant;
    if (task.variant) variant = make_variant(source, *task.variant, config_.plan()).data;
    const HtsDataset& data = variant ? *variant : source;

    for (const auto& method : config_.methods) {
      if (stop_) return;
      const auto key = cell_key(source.name(), tag, method.id);
      if (is_done(key)) continue;
      const auto t0 = std::chrono::steady_clock::now();
      CellState state;
      try {
        const auto run = run_method(data, method, dc.horizon);
        if (options_.on_forecast) options_.on_forecast({source.name(), tag, method.id}, run, data);
        const auto eval = evaluate_run(run, data, tag);
        std::string excluded = exclusions_csv_header();
        for (const auto& e : eval.excluded) {
          excluded += fmt::format("{},{},{},{},{},{},{}\n", source.name(), tag.transformation,
                                  version_label(tag.version), tag.sample, method.id, e.node, sanitize(e.reason));
        }
        csv::write_atomic(exclusion_file(source.name(), tag, method.id), excluded);
        if (config_.dump_forecasts) {
          csv::write_atomic(dir_ / "forecasts" / fmt::format("{}__{}.csv", variant_stem(source.name(), tag), method.id),
                            forecast_dump_csv(run));
        }
        csv::write_atomic(cell_file(source.name(), tag, method.id), results_csv(eval.records));
        state.status = CellStatus::Done;
      } catch (const IoError&) {
        throw;
      } catch (const std::exception& e) {
        state.status = CellStatus::Failed;
        state.reason = e.what();
      }
      state.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      finish_cell(key, std::move(state));
    }

    if (wants_distance(config_, tag)) {
      if (stop_) return;
      const auto key = cell_key(source.name(), tag, std::string(kDistanceCell));
      if (is_done(key)) return;
      const auto t0 = std::chrono::steady_clock::now();
      CellState state;
      try {
        const DistanceEntry entry{source.name(), tag, pairwise_distribution(data, pairwise_options(config_))};
        csv::write_atomic(cell_file(source.name(), tag, kDistanceCell), distances_csv({&entry, 1}));
        state.status = CellStatus::Done;
      } catch (const IoError&) {
        throw;
      } catch (const std::exception& e) {
        state.status = CellStatus::Failed;
        state.reason = e.what();
      }
      state.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      finish_cell(key, std::move(state));
    }
  }

  void aggregate() {
    std::vector<EvalRecord> records;
    std::string excluded = exclusions_csv_header();
    std::vector<DistanceEntry> distances;

    for (std::size_t d = 0; d < datasets_.size(); ++d) {
      const auto& name = datasets_[d].name();
      std::vector<EvalRecord> dataset_records;
      std::map<std::pair<std::string, int>, std::size_t> distance_slot;
      for (const auto& task : tasks_) {
        if (task.dataset != d) continue;
        const auto tag = task.tag();
        for (const auto& m : config_.methods) {
          if (manifest_.cells.at(cell_key(name, tag, m.id)).status != CellStatus::Done) continue;
          auto rs = parse_results_csv(csv::read_file(cell_file(name, tag, m.id)));
          dataset_records.insert(dataset_records.end(), rs.begin(), rs.end());
          const auto ex = exclusion_file(name, tag, m.id);
          if (fs::exists(ex)) {
            const auto text = csv::read_file(ex);
            excluded += text.substr(std::min(text.size(), exclusions_csv_header().size()));
          }
        }
        if (wants_distance(config_, tag) &&
            manifest_.cells.at(cell_key(name, tag, std::string(kDistanceCell))).status == CellStatus::Done) {
          auto pairs = parse_pairs(csv::read_file(cell_file(name, tag, kDistanceCell)));
          const std::pair<std::string, int> slot{tag.transformation, tag.version};
          VariantTag pooled = tag;
          pooled.sample = 0;
          const auto it = distance_slot.find(slot);
          if (it == distance_slot.end()) {
            distance_slot.emplace(slot, distances.size());
            distances.push_back({name, pooled, summarize(std::move(pairs))});
          } else {
            auto& entry = distances[it->second];
            auto merged = std::move(entry.distribution.pairs);
            merged.insert(merged.end(), pairs.begin(), pairs.end());
            entry.distribution = summarize(std::move(merged));
          }
        }
      }
      csv::write_atomic(dir_ / fmt::format("table_{}.csv", name),
                        level_table_csv(dataset_records, datasets_[d].schema()));
      records.insert(records.end(), dataset_records.begin(), dataset_records.end());
    }

    csv::write_atomic(dir_ / "results.csv", results_csv(records));
    csv::write_atomic(dir_ / "exclusions.csv", excluded);
    write_rank_files(records, dir_);
    csv::write_atomic(dir_ / "distances.csv", distances_csv(distances));
    const auto summary = summarize_distances(distances);
    csv::write_atomic(dir_ / "distance_summary.csv", distance_summary_csv(summary));
  }

  const ExperimentConfig& config_;
  const RunOptions& options_;
  fs::path dir_;
  fs::path cells_dir_;
  std::string config_json_;
  std::vector<HtsDataset> datasets_;
  std::vector<Task> tasks_;
  RunManifest manifest_;

  std::mutex mutex_;
  std::atomic<std::size_t> next_{0};
  std::atomic<bool> stop_{false};
  std::size_t completed_ = 0;
  std::exception_ptr error_;
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto effective = effective_config(config, options);
  validate(effective);
  Runner runner(effective, options);
  return runner.run();
}

std::vector<std::pair<VariantTag, DistanceDistribution>> distance_distributions(const ExperimentConfig& config,
                                                                                const HtsDataset& dataset) {
  const auto options = pairwise_options(config);
  std::vector<std::pair<VariantTag, DistanceDistribution>> out;
  out.emplace_back(VariantTag::orig(), pairwise_distribution(dataset, options));
  std::map<std::pair<std::string, int>, std::size_t> slot;
  const auto plan = config.plan();
  for (const auto& key : enumerate_variants(dataset, plan)) {
    const auto tag = VariantTag::of(key);
    if (!wants_distance(config, tag)) continue;
    auto dist = pairwise_distribution(make_variant(dataset, key, plan).data, options);
    const std::pair<std::string, int> s{tag.transformation, tag.version};
    const auto it = slot.find(s);
    if (it == slot.end()) {
      slot.emplace(s, out.size());
      out.emplace_back(VariantTag{tag.transformation, tag.version, 0}, std::move(dist));
    } else {
      auto merged = std::move(out[it->second].second.pairs);
      merged.insert(merged.end(), dist.pairs.begin(), dist.pairs.end());
      out[it->second].second = summarize(std::move(merged));
    }
  }
  return out;
}

std::size_t write_variants(const ExperimentConfig& config, const fs::path& directory) {
  std::size_t written = 0;
  const auto plan = config.plan();
  for (const auto& dc : config.datasets) {
    const auto dataset = load_configured_dataset(config, dc);
    csv::write_atomic(directory / fmt::format("{}__schema.csv", dataset.name()), to_schema_csv(dataset.schema()));
    ++written;
    generate_variants(dataset, plan, [&](TransformedDataset&& v) {
      csv::write_atomic(directory / (v.provenance.file_stem(dataset.name()) + ".csv"), to_data_csv(v.data));
      ++written;
    });
  }
  return written;
}

}  // namespace htsr
