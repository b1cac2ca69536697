#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace htsr {

/// A univariate series with integer time index.
struct TimeSeries {
  std::string id;
  std::vector<double> values;
  int seasonal_period = 1;
  int start_index = 0;

  std::size_t size() const { return values.size(); }
};

/// Throws PreconditionError unless the series is non-empty, finite and has a
/// positive seasonal period.
void validate(const TimeSeries& series);

/// Identifies one node of the hierarchy: the top node, a (dimension, element)
/// group node, or a bottom series.
struct NodeId {
  enum class Kind { Top = 0, Group = 1, Bottom = 2 };

  Kind kind = Kind::Top;
  std::string dimension;
  /// Element label for group nodes, series id for bottom nodes.
  std::string name;

  static NodeId top() { return {}; }
  static NodeId group(std::string dimension, std::string element) {
    return {Kind::Group, std::move(dimension), std::move(element)};
  }
  static NodeId bottom(std::string series_id) { return {Kind::Bottom, {}, std::move(series_id)}; }

  /// "top", "<dimension>=<element>" or the bare series id.
  std::string label() const;
  static NodeId parse(std::string_view label);

  bool is_aggregate() const { return kind != Kind::Bottom; }

  auto operator<=>(const NodeId&) const = default;
  bool operator==(const NodeId&) const = default;
};

/// Named group dimensions and a total membership function assigning every
/// bottom series exactly one element per dimension.
class GroupSchema {
 public:
  GroupSchema() = default;
  /// `membership[id][d]` is the element of series `id` in dimension `d`.
  GroupSchema(std::vector<std::string> dimensions,
              std::map<std::string, std::vector<std::string>> membership);

  const std::vector<std::string>& dimensions() const { return dimensions_; }
  const std::map<std::string, std::vector<std::string>>& membership() const { return membership_; }

  std::size_t dimension_index(std::string_view dimension) const;
  const std::string& element_of(std::string_view series_id, std::size_t dimension) const;
  /// Distinct element labels of a dimension, ascending.
  const std::vector<std::string>& elements(std::size_t dimension) const { return elements_.at(dimension); }

  bool operator==(const GroupSchema& other) const {
    return dimensions_ == other.dimensions_ && membership_ == other.membership_;
  }

 private:
  std::vector<std::string> dimensions_;
  std::map<std::string, std::vector<std::string>> membership_;
  std::vector<std::vector<std::string>> elements_;
};

/// The linear map from bottom series to every node. Node order is the top
/// node, then group nodes (dimension order, elements ascending), then the
/// bottom series in ascending id order.
class SummingStructure {
 public:
  SummingStructure(const GroupSchema& schema, std::vector<std::string> bottom_ids);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_bottom() const { return bottom_ids_.size(); }
  std::size_t num_aggregates() const { return nodes_.size() - bottom_ids_.size(); }
  /// Index of the first bottom node within nodes().
  std::size_t bottom_offset() const { return num_aggregates(); }

  /// Bottom positions (0-based, ascending) summed by node `node`.
  const std::vector<std::size_t>& members(std::size_t node) const { return members_.at(node); }
  std::size_t index_of(const NodeId& node) const;
  const std::vector<std::string>& bottom_ids() const { return bottom_ids_; }

  /// Group-node indices belonging to one dimension.
  std::vector<std::size_t> dimension_nodes(std::string_view dimension) const;

  /// Sums the bottom rows into a value for every node. `bottom[b]` holds the
  /// values of bottom series b; all rows must share a length.
  std::vector<std::vector<double>> sum_up(std::span<const std::vector<double>> bottom) const;

 private:
  std::vector<NodeId> nodes_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::string> bottom_ids_;
  std::map<NodeId, std::size_t> index_;
};

/// Bottom-level series plus their group schema. Aggregates are always derived
/// from the bottom series.
class HtsDataset {
 public:
  HtsDataset(std::string name, std::vector<TimeSeries> bottom, GroupSchema schema);

  const std::string& name() const { return name_; }
  std::span<const TimeSeries> bottom() const { return bottom_; }
  const GroupSchema& schema() const { return schema_; }
  const SummingStructure& structure() const { return *structure_; }
  std::size_t length() const { return bottom_.front().size(); }
  int seasonal_period() const { return bottom_.front().seasonal_period; }
  std::size_t num_series() const { return bottom_.size(); }

  const TimeSeries& series(std::string_view id) const;

  /// A dataset with identical schema and ids but new bottom values.
  HtsDataset with_bottom(std::vector<TimeSeries> bottom) const;

 private:
  std::string name_;
  std::vector<TimeSeries> bottom_;
  GroupSchema schema_;
  std::shared_ptr<const SummingStructure> structure_;
};

struct LoadOptions {
  std::string name = "dataset";
  int seasonal_period = 1;
};

/// Reads a long-format data CSV (`series_id,t,value`) and a schema CSV
/// (`series_id,<dim1>,...`).
HtsDataset load_dataset(const std::filesystem::path& data_path,
                        const std::filesystem::path& schema_path,
                        const LoadOptions& options = {});

/// Writes the data CSV in canonical order (series ascending, then t).
std::string to_data_csv(const HtsDataset& dataset);
std::string to_schema_csv(const GroupSchema& schema);

/// Pointwise sum of the member bottom series of `node`.
TimeSeries aggregate(const HtsDataset& dataset, const NodeId& node);

/// Values for every node of the structure, indexed like structure().nodes().
std::vector<std::vector<double>> aggregate_all(const HtsDataset& dataset);

struct Tolerance {
  double value = 0.0;
  /// When set, the allowed deviation is value * (1 + |expected|).
  bool relative = false;

  double allowed(double expected) const;
};

struct CoherenceReport {
  bool coherent = true;
  std::optional<NodeId> worst_node;
  std::size_t worst_step = 0;
  double max_deviation = 0.0;
};

/// Compares candidate aggregate series against the aggregates recomputed
/// from the dataset.
CoherenceReport check_coherence(const HtsDataset& dataset,
                                const std::map<NodeId, std::vector<double>>& candidates,
                                Tolerance tolerance);

/// Checks that every aggregate row of `node_values` (indexed like
/// structure.nodes()) equals the sum of its bottom rows.
CoherenceReport check_coherence(const SummingStructure& structure,
                                std::span<const std::vector<double>> node_values,
                                Tolerance tolerance);

/// Moves the last `horizon` observations of every bottom series into the
/// second dataset.
std::pair<HtsDataset, HtsDataset> split(const HtsDataset& dataset, std::size_t horizon);

}  // namespace htsr
