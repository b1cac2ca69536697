#pragma once

#include <vector>

namespace test {

struct MaseFixture {
  std::vector<double> train;
  std::vector<double> actual;
  std::vector<double> forecast;
  double expected;
};

// Expected values worked out by hand from the definition: mean absolute
// horizon error over the mean absolute one-step difference of train.
inline const std::vector<MaseFixture>& mase_fixtures() {
  static const std::vector<MaseFixture> cases{
      {{1, 2, 3, 4}, {5, 6}, {5, 7}, 0.5},
      {{1, 3}, {2}, {2}, 0.0},
      {{0, 2, 4}, {6, 8}, {4, 6}, 1.0},
      {{1, 2, 4, 7}, {10}, {7}, 1.5},
      {{5, 3}, {1, 1, 1}, {2, 0, 1}, 1.0 / 3.0},
      {{-1, 1, -1, 1}, {0}, {0.5}, 0.25},
      {{10, 10, 11}, {11, 11}, {12, 10}, 2.0},
      {{0, 4}, {1, 2, 3, 4}, {0, 0, 0, 0}, 0.625},
      {{2, 1, 0}, {-1}, {-1.25}, 0.25},
      {{1, 2, 3, 4, 5, 6, 7, 8}, {9, 10, 11, 12}, {9, 10, 11, 12}, 0.0},
      {{3, 1, 4, 1, 5}, {9, 2}, {6, 8}, 1.5},
      {{100, 90}, {80}, {100}, 2.0},
      {{0, 0.5, 0, 0.5}, {0, 0.5}, {0.5, 0}, 1.0},
      {{1, -1}, {2, 2, 2, 2, 2}, {1, 1, 1, 1, 1}, 0.5},
      {{0, 1, 3, 6, 10}, {15, 21}, {14, 20}, 0.4},
      {{2, 2, 2, 5}, {5, 5, 5}, {6, 4, 5}, 2.0 / 3.0},
      {{1, 2}, {3}, {1e6}, 999997.0},
      {{0, 8, 0}, {4, 4}, {0, 8}, 0.5},
      {{7, 6, 5, 4, 3, 2}, {1, 0, -1}, {1, 1, 1}, 1.0},
      {{0.1, 0.2, 0.4}, {0.5}, {0.8}, 2.0},
  };
  return cases;
}

}  // namespace test
