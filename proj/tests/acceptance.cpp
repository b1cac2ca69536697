// Acceptance checks on the fixed synthetic dataset. Prints one PASS/FAIL line
// per criterion and exits non-zero if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <mutex>
#include <random>

#include <fmt/format.h>

#include "htsr/config.hpp"
#include "htsr/distance.hpp"
#include "htsr/evaluate.hpp"
#include "htsr/experiment.hpp"
#include "htsr/forecast.hpp"
#include "htsr/report.hpp"
#include "htsr/synthetic.hpp"
#include "htsr/transforms.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "support.hpp"

#ifndef HTSR_CLI
#error "HTSR_CLI must name the command-line binary"
#endif

using namespace htsr;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  fmt::print("{} {:>2} {}: {}\n", pass ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
}

// Runs a check, turning any exception into a failure line.
void criterion(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& check) {
  try {
    const auto [pass, detail] = check();
    report(id, name, pass, detail);
  } catch (const std::exception& e) {
    report(id, name, false, fmt::format("exception: {}", e.what()));
  }
}

const char* const kMethods = R"("naive_bu", "snaive_bu", "ets_bu", "ets_mint", "ar_bu")";

std::string config_text(const std::string& output) {
  return fmt::format(R"({{"datasets": [{{"name": "synthetic", "data": "data.csv", "schema": "schema.csv",
    "seasonal_period": 12, "horizon": 12}}],
  "transformations": {{"kinds": ["jitter", "scaling", "magnitude_warp", "time_warp"],
    "num_versions": 6, "num_samples": 5}},
  "methods": [{}],
  "dtw": {{"q": 2, "normalize": true}},
  "master_seed": 42, "output_dir": "{}"}})",
                     kMethods, output);
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const auto cmd = fmt::format("\"{}\" {} >\"{}\" 2>&1", HTSR_CLI, args, log.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
  const test::TempDir work("acceptance");
  const auto dstar = make_synthetic();
  test::write_file(work / "data.csv", to_data_csv(dstar));
  test::write_file(work / "schema.csv", to_schema_csv(dstar.schema()));
  test::write_file(work / "config.json", config_text("inproc"));

  criterion(1, "DTW equals brute-force path enumeration", [] {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, 6);
    std::normal_distribution<double> value(0.0, 2.0);
    std::size_t checked = 0;
    std::size_t mismatches = 0;
    for (int i = 0; i < 200; ++i) {
      std::vector<double> a(len(rng));
      std::vector<double> b(len(rng));
      for (auto& v : a) v = value(rng);
      for (auto& v : b) v = value(rng);
      for (const double q : {1.0, 2.0}) {
        ++checked;
        if (dtw(a, b, {q, std::nullopt}) != test::brute_force_dtw(a, b, q)) ++mismatches;
      }
    }
    return std::pair{mismatches == 0, fmt::format("{} comparisons, {} mismatches", checked, mismatches)};
  });

  criterion(2, "MASE matches hand-computed fixtures", [] {
    const auto fixtures = test::mase_fixtures();
    double worst = 0.0;
    bool has_reference = false;
    for (const auto& f : fixtures) {
      worst = std::max(worst, std::abs(mase_series(f.actual, f.forecast, f.train) - f.expected));
      if (f.train == std::vector<double>{1, 2, 3, 4} && f.expected == 0.5) has_reference = true;
    }
    return std::pair{fixtures.size() == 20 && has_reference && worst <= 1e-12,
                     fmt::format("{} fixtures, max abs error {:.3g}", fixtures.size(), worst)};
  });

  // One in-process run of the full experiment feeds criteria 3 and 7 to 10.
  std::vector<EvalRecord> records;
  std::filesystem::path experiment_dir;
  std::size_t runs = 0;
  std::size_t incoherent = 0;
  double worst_dev = 0.0;
  double run_seconds = 0.0;
  bool run_ok = false;
  try {
    const auto cfg = load_config(work / "config.json");
    std::mutex mutex;
    RunOptions options;
    options.on_forecast = [&](const CellInfo&, const ForecastRun& run, const HtsDataset& data) {
      if (run.reconciliation == Reconciliation::None) return;
      const auto r = check_coherence(data.structure(), run.forecasts, Tolerance{1e-6, true});
      std::lock_guard lock(mutex);
      ++runs;
      worst_dev = std::max(worst_dev, r.max_deviation);
      if (!r.coherent) ++incoherent;
    };
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_experiment(cfg, options);
    run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    experiment_dir = result.directory;
    records = parse_results_csv(test::read_file(experiment_dir / "results.csv"));
    run_ok = result.manifest.count(CellStatus::Failed) == 0 && !result.interrupted;
    fmt::print("# full run: {} cells in {:.1f} s, {} failed\n", result.manifest.cells.size(), run_seconds,
               result.manifest.count(CellStatus::Failed));
  } catch (const std::exception& e) {
    fmt::print("# full run failed: {}\n", e.what());
  }

  criterion(3, "every BU and MinT run is coherent", [&] {
    const std::size_t expected = 5 * (1 + 4 * 6 * 5);
    return std::pair{run_ok && runs == expected && incoherent == 0,
                     fmt::format("{} of {} runs checked, {} incoherent, max deviation {:.3g}", runs, expected,
                                 incoherent, worst_dev)};
  });

  criterion(4, "identity MinT closed form on the 3-node fixture", [] {
    const GroupSchema schema({}, {{"b1", {}}, {"b2", {}}});
    const SummingStructure st(schema, {"b1", "b2"});
    const auto out = reconcile_mint({{10}, {4}, {4}}, st, {}, {CovarianceKind::Identity, std::nullopt});
    const double err = std::max({std::abs(out[1][0] - 14.0 / 3.0), std::abs(out[2][0] - 14.0 / 3.0),
                                 std::abs(out[0][0] - 28.0 / 3.0)});
    return std::pair{err <= 1e-12, fmt::format("b = [{:.15g}, {:.15g}], top = {:.15g}, max error {:.3g}", out[1][0],
                                               out[2][0], out[0][0], err)};
  });

  criterion(5, "sigma 0 leaves every series bitwise unchanged", [&] {
    std::size_t checked = 0;
    std::size_t changed = 0;
    Rng rng(42);
    for (const auto& s : dstar.bottom()) {
      for (const auto& t : {jitter(s, 0.0, rng), scaling(s, 0.0, rng), magnitude_warp(s, 0.0, 4, rng),
                            time_warp(s, 0.0, 4, rng)}) {
        ++checked;
        if (!same_bits(t.values, s.values)) ++changed;
      }
    }
    return std::pair{changed == 0, fmt::format("{} transformed series, {} differ", checked, changed)};
  });

  criterion(6, "CLI runs are byte-identical across repeats and --jobs", [&] {
    const auto cfg = (work / "config.json").string();
    std::vector<std::string> outputs;
    std::vector<int> codes;
    for (const auto& [out, jobs] : std::vector<std::pair<std::string, int>>{{"cli1", 1}, {"cli2", 1}, {"cli8", 8}}) {
      test::write_file(work / "config.json", config_text(out));
      codes.push_back(run_cli(fmt::format("--config \"{}\" --seed 42 --jobs {} run --no-plots", cfg, jobs),
                              work / (out + ".log")));
      const auto dir = work / out / experiment_dir.filename();
      std::string all;
      for (const auto* name : {"results.csv", "distances.csv", "distance_summary.csv", "ranks.csv",
                               "ranks_by_level.csv", "ranks_aggregated.csv", "table_synthetic.csv"}) {
        all += test::read_file(dir / name);
      }
      outputs.push_back(std::move(all));
    }
    const bool ok = codes == std::vector<int>{0, 0, 0} && !outputs[0].empty() && outputs[0] == outputs[1] &&
                    outputs[0] == outputs[2];
    return std::pair{ok, fmt::format("exit codes {}/{}/{}, {} bytes, repeat {}, jobs 8 {}", codes[0], codes[1],
                                     codes[2], outputs[0].size(), outputs[0] == outputs[1] ? "equal" : "differs",
                                     outputs[0] == outputs[2] ? "equal" : "differs")};
  });

  criterion(7, "magnitude warp shifts DTW more with each version, and well beyond time warp", [&] {
    const auto cfg = load_config(work / "config.json");
    const auto dists = distance_distributions(cfg, dstar);
    const auto& orig = dists.front().second;
    std::map<std::pair<std::string, int>, double> shift;
    for (const auto& [tag, d] : dists) {
      if (!tag.is_orig()) shift[{tag.transformation, tag.version}] = std::abs(distribution_shift(orig, d).mean_delta);
    }
    bool increasing = true;
    std::string curve;
    for (int v = 0; v < 6; ++v) {
      const double s = shift.at({"magnitude_warp", v});
      curve += fmt::format("{}{:.4f}", v ? " " : "", s);
      if (v > 0 && !(s > shift.at({"magnitude_warp", v - 1}))) increasing = false;
    }
    const double mw = shift.at({"magnitude_warp", 5});
    const double tw = shift.at({"time_warp", 5});
    return std::pair{increasing && mw >= 3.0 * tw,
                     fmt::format("|shift| v0..v5 = [{}], v5 ratio to time warp {:.1f}", curve, mw / tw)};
  });

  criterion(8, "ETS+BU error grows with magnitude warp intensity", [&] {
    const auto curve = robustness_curve(records, "synthetic", "magnitude_warp", "ets_bu", "top", 6);
    std::vector<double> index;
    std::vector<double> means;
    std::string text;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (curve[i].missing) continue;
      index.push_back(static_cast<double>(i));
      means.push_back(curve[i].mean);
      text += fmt::format("{}{:.4f}", text.empty() ? "" : " ", curve[i].mean);
    }
    const double rho = spearman(index, means);
    return std::pair{curve.size() == 7 && means.size() == 7 && rho >= 0.8,
                     fmt::format("Spearman {:.3f} over orig,v0..v5 = [{}]", rho, text)};
  });

  criterion(9, "rank sums and rank aggregation identity", [&] {
    const auto tables = rank_all_levels(records);
    std::size_t bad_sums = 0;
    std::size_t bad_aggregates = 0;
    for (const auto& t : tables) {
      const double m = static_cast<double>(t.ranks.size());
      double sum = 0.0;
      for (const auto& [name, r] : t.ranks) sum += r;
      if (t.ranks.size() != 5 || sum != m * (m + 1) / 2) ++bad_sums;
      const std::vector<RankTable> twice{t, t};
      const auto agg = aggregate_ranks(twice);
      if (agg.size() != 1 || agg.begin()->second != t.ranks) ++bad_aggregates;
    }
    const std::size_t expected = (1 + 4 * 6) * 4;
    return std::pair{tables.size() == expected && bad_sums == 0 && bad_aggregates == 0,
                     fmt::format("{} tables (expected {}), {} bad sums, {} bad aggregates", tables.size(), expected,
                                 bad_sums, bad_aggregates)};
  });

  criterion(10, "results table has Bottom, one column per dimension, Top", [&] {
    const auto table = test::read_file(experiment_dir / "table_synthetic.csv");
    const auto header = table.substr(0, table.find('\n'));
    const std::size_t rows = static_cast<std::size_t>(std::count(table.begin(), table.end(), '\n')) - 1;
    return std::pair{header == "dataset,method,Bottom,Region,Category,Top" && rows == 5,
                     fmt::format("header '{}', {} method rows", header, rows)};
  });

  criterion(11, "ETS forecasts a noiseless ramp", [] {
    TimeSeries ramp{"ramp", {}, 1};
    for (int t = 0; t < 50; ++t) ramp.values.push_back(t);
    const auto f = fit_predict(ramp, {ForecasterKind::EtsAdditive, {}}, 5);
    double worst = 0.0;
    for (std::size_t h = 0; h < f.size(); ++h) worst = std::max(worst, std::abs(f[h] - (50.0 + static_cast<double>(h))));
    return std::pair{f.size() == 5 && worst <= 0.5, fmt::format("max error {:.3g} over 5 steps", worst)};
  });

  fmt::print("# {} of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
