#include "htsr/hts_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "htsr/csv.hpp"
#include "htsr/error.hpp"

namespace htsr {

void validate(const TimeSeries& series) {
  if (series.values.empty()) {
    throw PreconditionError(fmt::format("series '{}' is empty", series.id));
  }
  if (series.seasonal_period < 1) {
    throw PreconditionError(fmt::format("series '{}' has seasonal period {} < 1", series.id,
                                        series.seasonal_period));
  }
  for (std::size_t t = 0; t < series.values.size(); ++t) {
    if (!std::isfinite(series.values[t])) {
      throw PreconditionError(fmt::format("series '{}' has a non-finite value at t={}", series.id, t));
    }
  }
}

// ---------------------------------------------------------------------------
// NodeId

std::string NodeId::label() const {
  switch (kind) {
    case Kind::Top:
      return "top";
    case Kind::Group:
      return dimension + "=" + name;
    case Kind::Bottom:
      return name;
  }
  return {};
}

NodeId NodeId::parse(std::string_view label) {
  if (label == "top") return top();
  const auto eq = label.find('=');
  if (eq != std::string_view::npos) {
    return group(std::string(label.substr(0, eq)), std::string(label.substr(eq + 1)));
  }
  if (label.empty()) throw LookupError("empty node label");
  return bottom(std::string(label));
}

// ---------------------------------------------------------------------------
// GroupSchema

GroupSchema::GroupSchema(std::vector<std::string> dimensions,
                         std::map<std::string, std::vector<std::string>> membership)
    : dimensions_(std::move(dimensions)), membership_(std::move(membership)) {
  std::set<std::string> seen;
  for (const auto& dim : dimensions_) {
    if (dim.empty()) throw SchemaMismatchError("empty dimension name");
    if (dim.find('=') != std::string::npos) {
      throw SchemaMismatchError(fmt::format("dimension name '{}' must not contain '='", dim));
    }
    if (!seen.insert(dim).second) throw SchemaMismatchError(fmt::format("duplicate dimension '{}'", dim));
  }
  std::vector<std::set<std::string>> elements(dimensions_.size());
  for (const auto& [id, row] : membership_) {
    if (row.size() != dimensions_.size()) {
      throw SchemaMismatchError(fmt::format("series '{}' has {} group labels, expected {}", id, row.size(),
                                            dimensions_.size()));
    }
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (row[d].empty()) {
        throw SchemaMismatchError(fmt::format("series '{}' has no element for dimension '{}'", id, dimensions_[d]));
      }
      elements[d].insert(row[d]);
    }
  }
  elements_.reserve(elements.size());
  for (auto& e : elements) elements_.emplace_back(e.begin(), e.end());
}

std::size_t GroupSchema::dimension_index(std::string_view dimension) const {
  const auto it = std::find(dimensions_.begin(), dimensions_.end(), dimension);
  if (it == dimensions_.end()) throw LookupError(fmt::format("unknown dimension '{}'", dimension));
  return static_cast<std::size_t>(it - dimensions_.begin());
}

const std::string& GroupSchema::element_of(std::string_view series_id, std::size_t dimension) const {
  const auto it = membership_.find(std::string(series_id));
  if (it == membership_.end()) throw LookupError(fmt::format("series '{}' not in schema", series_id));
  return it->second.at(dimension);
}

// ---------------------------------------------------------------------------
// SummingStructure

SummingStructure::SummingStructure(const GroupSchema& schema, std::vector<std::string> bottom_ids)
    : bottom_ids_(std::move(bottom_ids)) {
  std::sort(bottom_ids_.begin(), bottom_ids_.end());
  const std::size_t n = bottom_ids_.size();

  std::vector<std::size_t> all(n);
  for (std::size_t b = 0; b < n; ++b) all[b] = b;
  nodes_.push_back(NodeId::top());
  members_.push_back(all);

  for (std::size_t d = 0; d < schema.dimensions().size(); ++d) {
    for (const auto& element : schema.elements(d)) {
      std::vector<std::size_t> members;
      for (std::size_t b = 0; b < n; ++b) {
        if (schema.element_of(bottom_ids_[b], d) == element) members.push_back(b);
      }
      nodes_.push_back(NodeId::group(schema.dimensions()[d], element));
      members_.push_back(std::move(members));
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    nodes_.push_back(NodeId::bottom(bottom_ids_[b]));
    members_.push_back({b});
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i], i);
}

std::size_t SummingStructure::index_of(const NodeId& node) const {
  const auto it = index_.find(node);
  if (it == index_.end()) throw LookupError(fmt::format("unknown node '{}'", node.label()));
  return it->second;
}

std::vector<std::size_t> SummingStructure::dimension_nodes(std::string_view dimension) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeId::Kind::Group && nodes_[i].dimension == dimension) out.push_back(i);
  }
  if (out.empty()) throw LookupError(fmt::format("unknown dimension '{}'", dimension));
  return out;
}

std::vector<std::vector<double>> SummingStructure::sum_up(std::span<const std::vector<double>> bottom) const {
  if (bottom.size() != num_bottom()) {
    throw DimensionError(fmt::format("expected {} bottom rows, got {}", num_bottom(), bottom.size()));
  }
  const std::size_t len = bottom.empty() ? 0 : bottom.front().size();
  for (const auto& row : bottom) {
    if (row.size() != len) throw DimensionError("bottom rows differ in length");
  }
  std::vector<std::vector<double>> out(nodes_.size(), std::vector<double>(len, 0.0));
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& acc = out[i];
    for (const auto b : members_[i]) {
      const auto& row = bottom[b];
      for (std::size_t t = 0; t < len; ++t) acc[t] += row[t];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// HtsDataset

HtsDataset::HtsDataset(std::string name, std::vector<TimeSeries> bottom, GroupSchema schema)
    : name_(std::move(name)), bottom_(std::move(bottom)), schema_(std::move(schema)) {
  if (bottom_.empty()) throw PreconditionError(fmt::format("dataset '{}' has no series", name_));
  std::sort(bottom_.begin(), bottom_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < bottom_.size(); ++i) {
    const auto& s = bottom_[i];
    validate(s);
    if (s.id.empty() || s.id == "top" || s.id.find('=') != std::string::npos) {
      throw PreconditionError(fmt::format("invalid series id '{}'", s.id));
    }
    if (i > 0 && bottom_[i - 1].id == s.id) throw PreconditionError(fmt::format("duplicate series id '{}'", s.id));
    if (s.size() != bottom_.front().size()) {
      throw RaggedDataError(fmt::format("series '{}' has length {}, expected {}", s.id, s.size(),
                                        bottom_.front().size()));
    }
    if (s.seasonal_period != bottom_.front().seasonal_period) {
      throw PreconditionError(fmt::format("series '{}' has a different seasonal period", s.id));
    }
  }
  const auto& membership = schema_.membership();
  for (const auto& s : bottom_) {
    if (!membership.contains(s.id)) {
      throw SchemaMismatchError(fmt::format("series '{}' missing from schema", s.id));
    }
  }
  if (membership.size() != bottom_.size()) {
    std::set<std::string> ids;
    for (const auto& s : bottom_) ids.insert(s.id);
    for (const auto& [id, row] : membership) {
      if (!ids.contains(id)) throw SchemaMismatchError(fmt::format("schema lists unknown series '{}'", id));
    }
  }
  std::vector<std::string> ids;
  ids.reserve(bottom_.size());
  for (const auto& s : bottom_) ids.push_back(s.id);
  structure_ = std::make_shared<const SummingStructure>(schema_, std::move(ids));
}

const TimeSeries& HtsDataset::series(std::string_view id) const {
  const auto it = std::lower_bound(bottom_.begin(), bottom_.end(), id,
                                   [](const TimeSeries& s, std::string_view key) { return s.id < key; });
  if (it == bottom_.end() || it->id != id) throw LookupError(fmt::format("unknown series '{}'", id));
  return *it;
}

HtsDataset HtsDataset::with_bottom(std::vector<TimeSeries> bottom) const {
  std::sort(bottom.begin(), bottom.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (bottom.size() != bottom_.size()) throw SchemaMismatchError("series count changed");
  for (std::size_t i = 0; i < bottom.size(); ++i) {
    if (bottom[i].id != bottom_[i].id) {
      throw SchemaMismatchError(fmt::format("series '{}' not in source dataset", bottom[i].id));
    }
    validate(bottom[i]);
    if (bottom[i].size() != bottom.front().size()) {
      throw RaggedDataError(fmt::format("series '{}' has length {}, expected {}", bottom[i].id, bottom[i].size(),
                                        bottom.front().size()));
    }
  }
  HtsDataset out = *this;
  out.bottom_ = std::move(bottom);
  return out;
}

// ---------------------------------------------------------------------------
// Ingestion

HtsDataset load_dataset(const std::filesystem::path& data_path, const std::filesystem::path& schema_path,
                        const LoadOptions& options) {
  const auto data = csv::read(data_path);
  const auto id_col = data.column("series_id");
  const auto t_col = data.column("t");
  const auto value_col = data.column("value");

  std::map<std::string, std::map<long long, double>> by_series;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    const auto where = fmt::format("{}: line {}", data_path.string(), data.lines[r]);
    if (row[id_col].empty()) throw ParseError(fmt::format("{}: missing series_id", where));
    if (row[value_col].empty()) throw ParseError(fmt::format("{}: missing value", where));
    const auto t = csv::parse_int(row[t_col], where + ": t");
    const auto v = csv::parse_double(row[value_col], where + ": value");
    if (t < 0) throw ParseError(fmt::format("{}: negative t", where));
    if (!std::isfinite(v)) throw ParseError(fmt::format("{}: non-finite value", where));
    if (!by_series[row[id_col]].emplace(t, v).second) {
      throw ParseError(fmt::format("{}: duplicate observation for series '{}' at t={}", where, row[id_col], t));
    }
  }
  if (by_series.empty()) throw ParseError(fmt::format("{}: no observations", data_path.string()));

  std::vector<TimeSeries> bottom;
  for (auto& [id, obs] : by_series) {
    TimeSeries s{id, {}, options.seasonal_period, 0};
    long long expected = 0;
    for (const auto& [t, v] : obs) {
      if (t != expected) {
        throw RaggedDataError(fmt::format("series '{}' has a gap at t={}", id, expected));
      }
      s.values.push_back(v);
      ++expected;
    }
    bottom.push_back(std::move(s));
  }
  for (const auto& s : bottom) {
    if (s.size() != bottom.front().size()) {
      throw RaggedDataError(fmt::format("series '{}' has length {} but series '{}' has length {}", s.id, s.size(),
                                        bottom.front().id, bottom.front().size()));
    }
  }

  const auto schema_table = csv::read(schema_path);
  if (schema_table.header.empty() || schema_table.header.front() != "series_id") {
    throw ParseError(fmt::format("{}: first column must be series_id", schema_path.string()));
  }
  std::vector<std::string> dimensions(schema_table.header.begin() + 1, schema_table.header.end());
  std::map<std::string, std::vector<std::string>> membership;
  for (std::size_t r = 0; r < schema_table.rows.size(); ++r) {
    const auto& row = schema_table.rows[r];
    std::vector<std::string> labels(row.begin() + 1, row.end());
    if (!membership.emplace(row.front(), std::move(labels)).second) {
      throw SchemaMismatchError(fmt::format("{}: line {}: duplicate series '{}'", schema_path.string(),
                                            schema_table.lines[r], row.front()));
    }
  }
  return HtsDataset(options.name, std::move(bottom), GroupSchema(std::move(dimensions), std::move(membership)));
}

std::string to_data_csv(const HtsDataset& dataset) {
  std::string out = "series_id,t,value\n";
  for (const auto& s : dataset.bottom()) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      out += fmt::format("{},{},{}\n", s.id, t, csv::format_double(s.values[t]));
    }
  }
  return out;
}

std::string to_schema_csv(const GroupSchema& schema) {
  std::string out = "series_id";
  for (const auto& d : schema.dimensions()) out += "," + d;
  out += '\n';
  for (const auto& [id, row] : schema.membership()) {
    out += id;
    for (const auto& e : row) out += "," + e;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation and coherence

namespace {

std::vector<std::vector<double>> bottom_rows(const HtsDataset& dataset) {
  std::vector<std::vector<double>> rows;
  rows.reserve(dataset.num_series());
  for (const auto& s : dataset.bottom()) rows.push_back(s.values);
  return rows;
}

}  // namespace

TimeSeries aggregate(const HtsDataset& dataset, const NodeId& node) {
  const auto& structure = dataset.structure();
  const auto idx = structure.index_of(node);
  TimeSeries out{node.label(), std::vector<double>(dataset.length(), 0.0), dataset.seasonal_period(),
                 dataset.bottom().front().start_index};
  for (const auto b : structure.members(idx)) {
    const auto& values = dataset.bottom()[b].values;
    for (std::size_t t = 0; t < values.size(); ++t) out.values[t] += values[t];
  }
  return out;
}

std::vector<std::vector<double>> aggregate_all(const HtsDataset& dataset) {
  const auto rows = bottom_rows(dataset);
  return dataset.structure().sum_up(rows);
}

double Tolerance::allowed(double expected) const {
  return relative ? value * (1.0 + std::abs(expected)) : value;
}

namespace {

void record_deviation(CoherenceReport& report, const NodeId& node, std::size_t step, double deviation,
                      double allowed) {
  if (!report.worst_node || deviation > report.max_deviation) {
    report.max_deviation = deviation;
    report.worst_node = node;
    report.worst_step = step;
  }
  if (!(deviation <= allowed)) report.coherent = false;
}

}  // namespace

CoherenceReport check_coherence(const HtsDataset& dataset, const std::map<NodeId, std::vector<double>>& candidates,
                                Tolerance tolerance) {
  CoherenceReport report;
  for (const auto& [node, values] : candidates) {
    const auto expected = aggregate(dataset, node);
    if (values.size() != expected.size()) {
      throw DimensionError(fmt::format("candidate '{}' has length {}, expected {}", node.label(), values.size(),
                                       expected.size()));
    }
    for (std::size_t t = 0; t < values.size(); ++t) {
      const double dev = std::abs(values[t] - expected.values[t]);
      record_deviation(report, node, t, dev, tolerance.allowed(expected.values[t]));
    }
  }
  return report;
}

CoherenceReport check_coherence(const SummingStructure& structure, std::span<const std::vector<double>> node_values,
                                Tolerance tolerance) {
  if (node_values.size() != structure.num_nodes()) {
    throw DimensionError(fmt::format("expected {} node rows, got {}", structure.num_nodes(), node_values.size()));
  }
  const auto bottom = node_values.subspan(structure.bottom_offset());
  const auto sums = structure.sum_up(bottom);
  CoherenceReport report;
  for (std::size_t i = 0; i < structure.num_aggregates(); ++i) {
    if (node_values[i].size() != sums[i].size()) {
      throw DimensionError(fmt::format("node '{}' has length {}, expected {}", structure.nodes()[i].label(),
                                       node_values[i].size(), sums[i].size()));
    }
    for (std::size_t t = 0; t < sums[i].size(); ++t) {
      const double dev = std::abs(node_values[i][t] - sums[i][t]);
      record_deviation(report, structure.nodes()[i], t, dev, tolerance.allowed(sums[i][t]));
    }
  }
  return report;
}

std::pair<HtsDataset, HtsDataset> split(const HtsDataset& dataset, std::size_t horizon) {
  const auto n = dataset.length();
  if (horizon == 0 || horizon >= n) {
    throw PreconditionError(fmt::format("horizon {} must be in [1, {})", horizon, n));
  }
  std::vector<TimeSeries> train;
  std::vector<TimeSeries> test;
  for (const auto& s : dataset.bottom()) {
    const auto cut = s.values.begin() + static_cast<std::ptrdiff_t>(n - horizon);
    train.push_back({s.id, {s.values.begin(), cut}, s.seasonal_period, s.start_index});
    test.push_back({s.id, {cut, s.values.end()}, s.seasonal_period,
                    s.start_index + static_cast<int>(n - horizon)});
  }
  return {HtsDataset(dataset.name(), std::move(train), dataset.schema()),
          HtsDataset(dataset.name(), std::move(test), dataset.schema())};
}

}  // namespace htsr
