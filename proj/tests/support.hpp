#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "htsr/hts_core.hpp"

namespace test {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("htsr_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// One dimension U with elements x (a, c) and y (b).
inline htsr::HtsDataset small_dataset(std::vector<double> a = {1, 2, 3, 4}, std::vector<double> b = {5, 6, 7, 8},
                                      std::vector<double> c = {2, 2, 1, 0}) {
  htsr::GroupSchema schema({"U"}, {{"a", {"x"}}, {"b", {"y"}}, {"c", {"x"}}});
  return htsr::HtsDataset("small", {{"a", std::move(a)}, {"b", std::move(b)}, {"c", std::move(c)}}, schema);
}

/// The two-dimension retailer layout: U in {a, b}, V in {x, y}.
inline htsr::HtsDataset retailer_dataset() {
  htsr::GroupSchema schema({"U", "V"}, {{"ax", {"a", "x"}}, {"ay", {"a", "y"}}, {"bx", {"b", "x"}}, {"by", {"b", "y"}}});
  return htsr::HtsDataset("retail",
                          {{"ax", {1, 2, 3}}, {"ay", {10, 20, 30}}, {"bx", {100, 200, 300}}, {"by", {0.5, 0.25, 0.125}}},
                          schema);
}

}  // namespace test
