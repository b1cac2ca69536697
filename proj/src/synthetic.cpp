#include "htsr/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "htsr/error.hpp"

namespace htsr {

HtsDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.dimensions.empty()) throw PreconditionError("synthetic data needs at least one dimension");
  for (const auto& [name, elements] : spec.dimensions) {
    if (elements.empty()) throw PreconditionError(fmt::format("dimension '{}' has no elements", name));
  }
  if (spec.length < 2) throw PreconditionError("synthetic series need length >= 2");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Shared effects: slope per element of the first dimension, phase per
  // element of the second (or of the first when there is only one).
  const auto& first = spec.dimensions.front().second;
  const auto& second = spec.dimensions.size() > 1 ? spec.dimensions[1].second : first;
  std::vector<double> slope(first.size());
  for (auto& s : slope) s = 0.05 + 0.25 * uniform(rng);
  std::vector<double> phase(second.size());
  for (auto& p : phase) p = static_cast<double>(spec.seasonal_period) * uniform(rng);

  // Enumerate the full cross product of elements.
  std::vector<std::vector<std::size_t>> combos{{}};
  for (const auto& [name, elements] : spec.dimensions) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& c : combos) {
      for (std::size_t e = 0; e < elements.size(); ++e) {
        auto extended = c;
        extended.push_back(e);
        next.push_back(std::move(extended));
      }
    }
    combos = std::move(next);
  }

  std::vector<std::string> dims;
  for (const auto& d : spec.dimensions) dims.push_back(d.first);
  std::map<std::string, std::vector<std::string>> membership;
  std::vector<TimeSeries> bottom;
  const double period = static_cast<double>(std::max(spec.seasonal_period, 1));
  for (std::size_t k = 0; k < combos.size(); ++k) {
    const auto& c = combos[k];
    std::string id = fmt::format("s{:03d}", k);
    std::vector<std::string> labels;
    for (std::size_t d = 0; d < c.size(); ++d) labels.push_back(spec.dimensions[d].second[c[d]]);
    membership.emplace(id, std::move(labels));

    const double level = spec.base_level * (0.5 + uniform(rng));
    const double own_slope = slope[c[0]] * (0.8 + 0.4 * uniform(rng));
    const double amplitude = level * (0.1 + 0.2 * uniform(rng));
    const double ph = phase[c.size() > 1 ? c[1] : c[0]];
    TimeSeries s{id, std::vector<double>(spec.length), spec.seasonal_period, 0};
    for (std::size_t t = 0; t < spec.length; ++t) {
      const double tt = static_cast<double>(t);
      s.values[t] = level + own_slope * tt + amplitude * std::sin(2.0 * std::numbers::pi * (tt + ph) / period) +
                    spec.noise_sd * normal(rng);
    }
    bottom.push_back(std::move(s));
  }
  return HtsDataset(spec.name, std::move(bottom), GroupSchema(std::move(dims), std::move(membership)));
}

}  // namespace htsr
