#include <doctest.h>

#include <regex>
#include <sstream>

#include "htsr/error.hpp"
#include "htsr/report.hpp"
#include "htsr/svg.hpp"
#include "support.hpp"

using namespace htsr;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

/// Values of `attr` on every element whose tag starts with `prefix`.
std::vector<std::string> attributes(const std::string& svg_text, const std::string& prefix, const std::string& attr) {
  std::vector<std::string> out;
  const std::regex element("<" + prefix + "[^>]*?\\s" + attr + "=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg_text.begin(), svg_text.end(), element); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

std::vector<std::pair<double, double>> parse_points(const std::string& points) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(points);
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  return out;
}

std::vector<double> path_numbers(const std::string& d) {
  std::vector<double> out;
  const std::regex number("-?[0-9]+(\\.[0-9]+)?");
  for (auto it = std::sregex_iterator(d.begin(), d.end(), number); it != std::sregex_iterator(); ++it) {
    out.push_back(std::stod(it->str()));
  }
  return out;
}

double polygon_area(const std::vector<std::pair<double, double>>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& [x1, y1] = p[i];
    const auto& [x2, y2] = p[(i + 1) % p.size()];
    a += x1 * y2 - x2 * y1;
  }
  return std::abs(a) / 2.0;
}

EvalRecord rec(std::string method, double mase, std::string transformation, int version, std::string level = "top",
               int sample = 0) {
  return {"d", std::move(transformation), version, sample, std::move(method), std::move(level), mase};
}

/// Three methods over orig plus two kinds with three versions; "good" always wins.
std::vector<EvalRecord> sample_records() {
  std::vector<EvalRecord> out;
  const std::vector<std::pair<std::string, double>> methods{{"good", 0.5}, {"mid", 1.0}, {"bad", 2.0}};
  for (const auto* level : {"bottom", "top"}) {
    for (const auto& [m, base] : methods) {
      out.push_back(rec(m, base, "orig", kOrigVersion, level));
      for (const auto* t : {"jitter", "scaling"})
        for (int v = 0; v < 3; ++v)
          for (int j = 0; j < 2; ++j) out.push_back(rec(m, base + 0.1 * v + 0.01 * j, t, v, level, j));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("line chart is deterministic with one panel per method and transformation") {
  const auto records = sample_records();
  const auto a = line_chart_svg(records, "d");
  CHECK(a == line_chart_svg(records, "d"));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(count_of(a, "class=\"panel\"") == 3 * 2);
  CHECK(count_of(a, "class=\"line\"") == 3 * 2 * 2);
  CHECK(count_of(a, "<polyline") == 3 * 2 * 2);
  for (const auto& pts : attributes(a, "polyline", "points")) CHECK(parse_points(pts).size() == 4);

  std::vector<EvalRecord> orig_only{rec("good", 1.0, "orig", kOrigVersion)};
  CHECK_THROWS_AS(line_chart_svg(orig_only, "d"), LookupError);
}

TEST_CASE("flat curves are drawn as horizontal lines and gaps split polylines") {
  const std::vector<svg::LineSeries> lines{{"flat", {2.0, 2.0, 2.0, 2.0}}, {"gap", {1.0, std::nullopt, 3.0, 3.5}}};
  const auto text = svg::line_chart("t", {"orig", "v0", "v1", "v2"}, {{{"p", lines}}}, "MASE");
  const auto polylines = attributes(text, "polyline", "points");
  REQUIRE(polylines.size() == 3);
  const auto flat = parse_points(polylines[0]);
  for (const auto& [x, y] : flat) CHECK(y == flat.front().second);
  CHECK(parse_points(polylines[1]).size() == 1);
  CHECK(parse_points(polylines[2]).size() == 2);
  CHECK_THROWS_AS(svg::line_chart("t", {}, {}, "y"), PreconditionError);
}

TEST_CASE("radar chart has one axis per version plus orig") {
  const auto records = sample_records();
  const auto text = radar_chart_svg(records, "d", "jitter");
  CHECK(count_of(text, "class=\"axis\"") == 3 + 1);
  CHECK(count_of(text, "class=\"method\"") == 3);
  CHECK(text == radar_chart_svg(records, "d", "jitter"));

  // The method ranked first everywhere draws the smallest polygon.
  const auto labels = attributes(text, "polygon class=\"method\"", "data-label");
  const auto points = attributes(text, "polygon class=\"method\"", "points");
  REQUIRE(labels.size() == points.size());
  std::map<std::string, double> area;
  for (std::size_t i = 0; i < labels.size(); ++i) area[labels[i]] = polygon_area(parse_points(points[i]));
  CHECK(area.at("good") < area.at("mid"));
  CHECK(area.at("mid") < area.at("bad"));

  CHECK_THROWS_AS(svg::radar_chart("t", {"a", "b"}, {{"m", {1, 1}}}, 1.0), PreconditionError);
  CHECK_THROWS_AS(svg::radar_chart("t", {"a", "b", "c"}, {{"m", {1, 1}}}, 1.0), DimensionError);
}

TEST_CASE("aggregated radar has one axis per transformation and version") {
  const auto text = aggregated_radar_svg(sample_records());
  CHECK(count_of(text, "class=\"axis\"") == 1 + 2 * 3);
}

TEST_CASE("ridge chart silhouettes") {
  const std::vector<DistanceSummaryRow> orig_only{{"d", "orig", kOrigVersion, 1.0, 0.5, 0.0, 1.0, 3},
                                                  {"d", "orig", kOrigVersion, 1.0, 0.5, 1.0, 2.0, 1}};
  const auto single = ridge_chart_svg(orig_only);
  CHECK(count_of(single, "<path class=\"silhouette") == 1);
  CHECK(count_of(single, "silhouette original") == 1);

  const svg::RidgeLayer layer{"x", {0.0, 1.0, 2.0}, {2, 5}};
  auto twin = layer;
  twin.label = "y";
  const auto text = svg::ridge_chart("t", {{"col", {{"row", {layer, twin}}}}});
  const auto paths = attributes(text, "path", "d");
  REQUIRE(paths.size() == 2);
  // Identical layers differ only by the vertical stacking offset.
  const auto a = path_numbers(paths[0]);
  const auto b = path_numbers(paths[1]);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); i += 2) {
    CHECK(a[i] == b[i]);
    CHECK(a[i + 1] - b[i + 1] == doctest::Approx(a[1] - b[1]));
  }
  CHECK(text == svg::ridge_chart("t", {{"col", {{"row", {layer, twin}}}}}));
}

TEST_CASE("ridge chart orders orig first and shades by intensity") {
  std::vector<DistanceSummaryRow> rows;
  for (int v = kOrigVersion; v < 3; ++v) {
    rows.push_back({"d", v == kOrigVersion ? "orig" : "jitter", v, 1.0, 0.1, 0.0, 1.0, 2});
    rows.push_back({"d", v == kOrigVersion ? "orig" : "jitter", v, 1.0, 0.1, 1.0, 2.0, 1});
  }
  const auto text = ridge_chart_svg(rows);
  const auto labels = attributes(text, "path", "data-label");
  // Drawn back to front.
  CHECK(labels == std::vector<std::string>{"v2", "v1", "v0", "orig"});
  const auto fills = attributes(text, "path", "fill");
  CHECK(fills[0] != fills[1]);
  CHECK_THROWS_AS(ridge_chart_svg(std::vector<DistanceSummaryRow>{}), PreconditionError);
}

TEST_CASE("escape handles markup characters") {
  CHECK(svg::escape("a<b & \"c\">") == "a&lt;b &amp; &quot;c&quot;&gt;");
}

TEST_CASE("rank files are recomputed from records") {
  const auto records = sample_records();
  const auto tables = rank_all(records, "top");
  REQUIRE(tables.size() == 1 + 2 * 3);
  CHECK(tables.front().transformation == "orig");
  CHECK(tables[1].transformation == "jitter");
  CHECK(tables[1].version == 0);
  for (const auto& t : tables) CHECK(t.ranks.at("good") == 1.0);
  CHECK(rank_all_levels(records).size() == 2 * tables.size());

  test::TempDir dir("ranks");
  write_rank_files(records, dir.path());
  CHECK(test::read_file(dir / "ranks.csv") == ranks_csv(tables));
  CHECK(test::read_file(dir / "ranks_aggregated.csv") == aggregated_ranks_csv(aggregate_ranks(tables)));
}

TEST_CASE("write_plots needs results") {
  test::TempDir dir("plots");
  CHECK_THROWS_AS(write_plots(dir.path()), IoError);
  test::write_file(dir / "results.csv", results_csv(sample_records()));
  const auto written = write_plots(dir.path());
  CHECK(written.size() >= 4);
  for (const auto& p : written) CHECK(std::filesystem::file_size(p) > 0);
}
