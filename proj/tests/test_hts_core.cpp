#include <doctest.h>

#include <algorithm>
#include <random>

#include "htsr/error.hpp"
#include "htsr/hts_core.hpp"
#include "htsr/synthetic.hpp"
#include "support.hpp"

using namespace htsr;

TEST_CASE("load_dataset reads a minimal well-formed input") {
  test::TempDir dir("load");
  test::write_file(dir / "data.csv", "series_id,t,value\nb,2,6\na,0,1\na,1,2\nb,0,4\na,2,3\nb,1,5\n");
  test::write_file(dir / "schema.csv", "series_id,U\na,x\nb,x\n");
  const auto ds = load_dataset(dir / "data.csv", dir / "schema.csv", {"mini", 1});
  CHECK(ds.num_series() == 2);
  CHECK(ds.schema().dimensions().size() == 1);
  CHECK(ds.length() == 3);
  CHECK(ds.series("b").values == std::vector<double>{4, 5, 6});
  CHECK(ds.name() == "mini");
}

TEST_CASE("load_dataset rejects ragged series") {
  test::TempDir dir("ragged");
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\na,1,2\na,2,3\nb,0,4\nb,1,5\n");
  test::write_file(dir / "schema.csv", "series_id,U\na,x\nb,x\n");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "schema.csv"), RaggedDataError);
}

TEST_CASE("load_dataset rejects a schema lacking a series") {
  test::TempDir dir("schema");
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\nb,0,4\n");
  test::write_file(dir / "schema.csv", "series_id,U\na,x\n");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "schema.csv"), SchemaMismatchError);
}

TEST_CASE("load_dataset rejects extra schema rows") {
  test::TempDir dir("extra");
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\n");
  test::write_file(dir / "schema.csv", "series_id,U\na,x\nz,y\n");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "schema.csv"), SchemaMismatchError);
}

TEST_CASE("load_dataset names the offending row for bad values") {
  test::TempDir dir("parse");
  test::write_file(dir / "schema.csv", "series_id,U\na,x\n");
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\na,1,\n");
  try {
    load_dataset(dir / "data.csv", dir / "schema.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\na,1,abc\n");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "schema.csv"), ParseError);
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\na,1,nan\n");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "schema.csv"), ParseError);
}

TEST_CASE("load_dataset rejects gaps and duplicate observations") {
  test::TempDir dir("gaps");
  test::write_file(dir / "schema.csv", "series_id,U\na,x\n");
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\na,2,3\n");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "schema.csv"), RaggedDataError);
  test::write_file(dir / "data.csv", "series_id,t,value\na,0,1\na,0,3\n");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "schema.csv"), ParseError);
}

TEST_CASE("load_dataset is deterministic and round-trips through the writers") {
  const auto synth = make_synthetic({.length = 30});
  test::TempDir dir("roundtrip");
  test::write_file(dir / "data.csv", to_data_csv(synth));
  test::write_file(dir / "schema.csv", to_schema_csv(synth.schema()));
  const auto a = load_dataset(dir / "data.csv", dir / "schema.csv", {"synthetic", 12});
  const auto b = load_dataset(dir / "data.csv", dir / "schema.csv", {"synthetic", 12});
  CHECK(to_data_csv(a) == to_data_csv(b));
  CHECK(a.schema() == b.schema());
  for (std::size_t i = 0; i < synth.num_series(); ++i) CHECK(a.bottom()[i].values == synth.bottom()[i].values);
}

TEST_CASE("aggregate sums member series") {
  GroupSchema schema({"U"}, {{"a", {"x"}}, {"b", {"y"}}});
  const HtsDataset ds("two", {{"a", {1, 2}}, {"b", {3, 4}}}, schema);
  CHECK(aggregate(ds, NodeId::top()).values == std::vector<double>{4, 6});
  CHECK(aggregate(ds, NodeId::group("U", "x")).values == std::vector<double>{1, 2});
  CHECK_THROWS_AS(aggregate(ds, NodeId::group("U", "zz")), LookupError);
  CHECK_THROWS_AS(aggregate(ds, NodeId::group("W", "x")), LookupError);
}

TEST_CASE("aggregate on the two-dimension retailer layout") {
  const auto ds = test::retailer_dataset();
  const auto& ax = ds.series("ax").values;
  const auto& ay = ds.series("ay").values;
  const auto a = aggregate(ds, NodeId::group("U", "a")).values;
  REQUIRE(a.size() == ax.size());
  for (std::size_t t = 0; t < a.size(); ++t) CHECK(a[t] == ax[t] + ay[t]);
  const auto x = aggregate(ds, NodeId::group("V", "x")).values;
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(x[t] == ax[t] + ds.series("bx").values[t]);
}

TEST_CASE("summing structure orders nodes top, groups, bottom") {
  const auto ds = test::retailer_dataset();
  const auto& nodes = ds.structure().nodes();
  std::vector<std::string> labels;
  for (const auto& n : nodes) labels.push_back(n.label());
  CHECK(labels == std::vector<std::string>{"top", "U=a", "U=b", "V=x", "V=y", "ax", "ay", "bx", "by"});
  CHECK(ds.structure().members(0).size() == 4);
  CHECK(ds.structure().bottom_offset() == 5);
  for (const auto& n : nodes) CHECK(NodeId::parse(n.label()) == n);
}

TEST_CASE("each dimension partitions the bottom series") {
  const auto ds = make_synthetic({.length = 24});
  const auto& st = ds.structure();
  for (const auto& dim : ds.schema().dimensions()) {
    std::vector<std::size_t> seen;
    for (const auto i : st.dimension_nodes(dim)) {
      const auto& m = st.members(i);
      seen.insert(seen.end(), m.begin(), m.end());
    }
    std::sort(seen.begin(), seen.end());
    std::vector<std::size_t> all(ds.num_series());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    CHECK(seen == all);
  }
}

TEST_CASE("partition property: element aggregates sum to the top exactly") {
  // Integer-valued data keeps every partial sum exact, so equality is bitwise.
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> draw(-1000, 1000);
  auto ds = make_synthetic({.length = 20});
  std::vector<TimeSeries> bottom(ds.bottom().begin(), ds.bottom().end());
  for (auto& s : bottom) {
    for (auto& v : s.values) v = draw(rng);
  }
  ds = ds.with_bottom(std::move(bottom));
  const auto all = aggregate_all(ds);
  const auto& st = ds.structure();
  for (const auto& dim : ds.schema().dimensions()) {
    for (std::size_t t = 0; t < ds.length(); ++t) {
      double sum = 0.0;
      for (const auto i : st.dimension_nodes(dim)) sum += all[i][t];
      CHECK(sum == all[0][t]);
    }
  }
}

TEST_CASE("check_coherence on recomputed aggregates at zero tolerance") {
  const auto ds = make_synthetic({.length = 24});
  std::map<NodeId, std::vector<double>> candidates;
  for (const auto& node : ds.structure().nodes()) {
    if (node.is_aggregate()) candidates[node] = aggregate(ds, node).values;
  }
  const auto report = check_coherence(ds, candidates, {0.0});
  CHECK(report.coherent);
  CHECK(report.max_deviation == 0.0);
  const auto all = aggregate_all(ds);
  CHECK(check_coherence(ds.structure(), all, {0.0}).coherent);
}

TEST_CASE("check_coherence reports the worst offender") {
  GroupSchema schema({"U"}, {{"a", {"x"}}, {"b", {"y"}}});
  const HtsDataset ds("two", {{"a", {1, 2}}, {"b", {3, 4}}}, schema);
  const auto report = check_coherence(ds, {{NodeId::top(), {4, 6.1}}}, {0.05});
  CHECK_FALSE(report.coherent);
  REQUIRE(report.worst_node);
  CHECK(*report.worst_node == NodeId::top());
  CHECK(report.worst_step == 1);
  CHECK(report.max_deviation == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(check_coherence(ds, {{NodeId::top(), {4, 6, 8}}}, {0.05}), DimensionError);
}

TEST_CASE("relative tolerance scales with the expected magnitude") {
  const Tolerance tol{1e-6, true};
  CHECK(tol.allowed(0.0) == doctest::Approx(1e-6));
  CHECK(tol.allowed(-1e6) == doctest::Approx(1e-6 * (1 + 1e6)));
  CHECK(Tolerance{0.5}.allowed(1e9) == 0.5);
}

TEST_CASE("split moves the last horizon observations to test") {
  const auto ds = make_synthetic({.length = 24});
  const auto [train, test_part] = split(ds, 4);
  CHECK(train.length() == 20);
  CHECK(test_part.length() == 4);
  CHECK_THROWS_AS(split(ds, 24), PreconditionError);
  CHECK_THROWS_AS(split(ds, 0), PreconditionError);

  const auto whole = aggregate_all(ds);
  const auto a = aggregate_all(train);
  const auto b = aggregate_all(test_part);
  for (std::size_t i = 0; i < whole.size(); ++i) {
    auto joined = a[i];
    joined.insert(joined.end(), b[i].begin(), b[i].end());
    CHECK(joined == whole[i]);
  }
}

TEST_CASE("dataset construction validates its invariants") {
  GroupSchema schema({"U"}, {{"a", {"x"}}, {"b", {"y"}}});
  CHECK_THROWS_AS(HtsDataset("r", {{"a", {1, 2}}, {"b", {3}}}, schema), RaggedDataError);
  CHECK_THROWS_AS(HtsDataset("m", {{"a", {1, 2}}}, schema), SchemaMismatchError);
  CHECK_THROWS_AS(HtsDataset("e", {{"a", {}}, {"b", {}}}, schema), PreconditionError);
  CHECK_THROWS_AS(GroupSchema({"U", "U"}, {{"a", {"x", "x"}}}), SchemaMismatchError);
  CHECK_THROWS_AS(GroupSchema({"U"}, {{"a", {"x", "y"}}}), SchemaMismatchError);
  TimeSeries bad{"a", {1.0, std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(validate(bad), PreconditionError);
  TimeSeries period{"a", {1.0}, 0};
  CHECK_THROWS_AS(validate(period), PreconditionError);
}

TEST_CASE("bottom series are stored in ascending id order regardless of input order") {
  GroupSchema schema({"U"}, {{"a", {"x"}}, {"b", {"y"}}, {"c", {"x"}}});
  const HtsDataset ds("o", {{"c", {1}}, {"a", {2}}, {"b", {3}}}, schema);
  CHECK(ds.bottom()[0].id == "a");
  CHECK(ds.bottom()[2].id == "c");
  CHECK(ds.structure().bottom_ids() == std::vector<std::string>{"a", "b", "c"});
}
