#include <doctest.h>

#include <fmt/format.h>

#include "htsr/config.hpp"
#include "htsr/error.hpp"
#include "htsr/experiment.hpp"
#include "htsr/synthetic.hpp"
#include "support.hpp"

using namespace htsr;

namespace {

const char* const kConfig = R"({
  "datasets": [{"name": "syn", "data": "data.csv", "schema": "schema.csv", "seasonal_period": 12, "horizon": 6}],
  "transformations": {"num_versions": 6, "num_samples": 2},
  "methods": ["naive_bu", "snaive_mint"],
  "master_seed": 42,
  "output_dir": "out"
})";

/// A small synthetic dataset written next to a config file.
struct Workspace {
  test::TempDir dir{"exp"};

  explicit Workspace(const std::string& config = kConfig) {
    SyntheticSpec spec;
    spec.dimensions = {{"R", {"r0", "r1"}}, {"C", {"c0", "c1"}}};
    spec.length = 40;
    const auto ds = make_synthetic(spec);
    test::write_file(dir / "data.csv", to_data_csv(ds));
    test::write_file(dir / "schema.csv", to_schema_csv(ds.schema()));
    test::write_file(dir / "config.json", config);
  }

  ExperimentConfig config(const std::string& out = "out") const {
    auto cfg = load_config(dir / "config.json");
    cfg.output_dir = dir / out;
    return cfg;
  }
};

std::string result_files(const std::filesystem::path& dir) {
  std::string all;
  for (const auto* name : {"results.csv", "distances.csv", "distance_summary.csv", "ranks.csv", "ranks_by_level.csv",
                           "ranks_aggregated.csv", "table_syn.csv", "exclusions.csv"}) {
    all += fmt::format("== {}\n{}", name, test::read_file(dir / name));
  }
  return all;
}

}  // namespace

TEST_CASE("config rejects unknown keys") {
  CHECK_THROWS_AS(parse_config(R"({"datasets": [], "methods": [], "bogus": 1})"), ConfigError);
  const std::string nested = R"({"datasets": [{"name": "a", "data": "d", "schema": "s", "horizon": 2}],
    "transformations": {"sigma": 0.1}, "methods": ["naive_bu"]})";
  CHECK_THROWS_AS(parse_config(nested), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"datasets": [{"name": "a", "data": "d", "schema": "s", "horizon": 2}],
    "methods": ["magic_bu"]})"),
                  ConfigError);
}

TEST_CASE("config hash ignores formatting and output location") {
  const auto a = parse_config(kConfig);
  const auto b = parse_config(R"({"output_dir":"elsewhere","master_seed":42,"methods":["naive_bu","snaive_mint"],
    "transformations":{"num_samples":2,"num_versions":6},"dump_forecasts":true,
    "datasets":[{"horizon":6,"seasonal_period":12,"schema":"schema.csv","data":"data.csv","name":"syn"}]})");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);

  auto c = a;
  c.master_seed = 43;
  CHECK(c.hash() != a.hash());
  auto d = a;
  d.transformations.num_samples = 3;
  CHECK(d.hash() != a.hash());
  auto e = a;
  e.methods.pop_back();
  CHECK(e.hash() != a.hash());
}

TEST_CASE("evaluation cell count") {
  const auto cfg = parse_config(kConfig);
  CHECK(count_evaluation_cells(cfg) == 98);
  CHECK(effective_config(cfg, {.seed_override = 7}).master_seed == 7);
}

TEST_CASE("configured datasets are checked against horizon and methods") {
  Workspace ws;
  auto cfg = ws.config();
  cfg.datasets[0].horizon = 40;
  CHECK_THROWS_AS(load_configured_dataset(cfg, cfg.datasets[0]), ConfigError);
  cfg.datasets[0].horizon = 20;  // 20 training steps, seasonal ETS needs 24
  cfg.methods.push_back(parse_method("ets_bu"));
  CHECK_THROWS_AS(load_configured_dataset(cfg, cfg.datasets[0]), ConfigError);
  cfg.datasets[0].data = "missing.csv";
  CHECK_THROWS_AS(load_configured_dataset(cfg, cfg.datasets[0]), IoError);
}

TEST_CASE("a full run completes every cell and is deterministic") {
  Workspace ws;
  const auto first = run_experiment(ws.config("a"));
  CHECK_FALSE(first.interrupted);
  // 98 evaluation cells plus distance cells for orig and each (kind, version).
  CHECK(first.manifest.count(CellStatus::Done) == 98 + 1 + 24);
  CHECK(first.manifest.count(CellStatus::Failed) == 0);
  const auto results = parse_results_csv(test::read_file(first.directory / "results.csv"));
  CHECK(results.size() == 98 * 4);

  const auto second = run_experiment(ws.config("b"));
  CHECK(result_files(first.directory) == result_files(second.directory));
  CHECK(first.directory.filename() == second.directory.filename());

  const auto parallel = run_experiment(ws.config("c"), {.jobs = 4});
  CHECK(result_files(parallel.directory) == result_files(first.directory));

  const auto reseeded = run_experiment(ws.config("d"), {.seed_override = 7});
  CHECK(reseeded.directory.filename() != first.directory.filename());
  CHECK(test::read_file(reseeded.directory / "results.csv") != test::read_file(first.directory / "results.csv"));
}

TEST_CASE("an interrupted run resumes to the same outputs") {
  Workspace ws;
  const auto fresh = run_experiment(ws.config("fresh"));

  const auto cfg = ws.config("resumed");
  const auto partial = run_experiment(cfg, {.stop_after_cells = 30});
  CHECK(partial.interrupted);
  CHECK(partial.manifest.count(CellStatus::Done) >= 30);
  CHECK(partial.manifest.count(CellStatus::Pending) > 0);
  CHECK_FALSE(std::filesystem::exists(partial.directory / "results.csv"));

  const auto resumed = run_experiment(cfg, {.resume = true});
  CHECK_FALSE(resumed.interrupted);
  CHECK(resumed.manifest.count(CellStatus::Pending) == 0);
  CHECK(result_files(resumed.directory) == result_files(fresh.directory));

  const auto manifest = RunManifest::from_json(test::read_file(resumed.directory / "manifest.json"));
  CHECK(manifest.config_hash == cfg.hash());
  CHECK(manifest.cells.size() == resumed.manifest.cells.size());
  CHECK(RunManifest::from_json(manifest.to_json()).to_json() == manifest.to_json());
}

TEST_CASE("variant files are written per dataset") {
  Workspace ws;
  test::TempDir out("variants");
  CHECK(write_variants(ws.config(), out.path()) == 1 + 48);
  CHECK(std::filesystem::exists(out / "syn__schema.csv"));
  CHECK(std::filesystem::exists(out / "syn__magnitude_warp__v5__s1.csv"));
  const auto ds = load_dataset(out / "syn__jitter__v0__s0.csv", out / "syn__schema.csv");
  CHECK(ds.num_series() == 4);
  CHECK(ds.length() == 40);
}

TEST_CASE("distance distributions cover orig and every kind and version") {
  Workspace ws;
  const auto cfg = ws.config();
  const auto ds = load_configured_dataset(cfg, cfg.datasets[0]);
  const auto dists = distance_distributions(cfg, ds);
  REQUIRE(dists.size() == 1 + 24);
  CHECK(dists[0].first.is_orig());
  for (const auto& [tag, d] : dists) CHECK(d.values.size() == 6);

  auto pooled = cfg;
  pooled.distance.all_samples = true;
  for (const auto& [tag, d] : distance_distributions(pooled, ds)) CHECK(d.values.size() == (tag.is_orig() ? 6 : 12));
}
