#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "htsr/hts_core.hpp"

namespace htsr {

/// Trend + seasonal + Gaussian noise panel over a full cross of group
/// dimensions. Series sharing an element of the first dimension share a
/// trend slope; series sharing an element of the second share a seasonal
/// phase.
struct SyntheticSpec {
  std::string name = "synthetic";
  std::vector<std::pair<std::string, std::vector<std::string>>> dimensions = {
      {"Region", {"r0", "r1", "r2", "r3"}},
      {"Category", {"c0", "c1", "c2", "c3", "c4", "c5"}},
  };
  std::size_t length = 120;
  int seasonal_period = 12;
  double base_level = 100.0;
  double noise_sd = 2.0;
  std::uint64_t seed = 42;
};

HtsDataset make_synthetic(const SyntheticSpec& spec = {});

}  // namespace htsr
