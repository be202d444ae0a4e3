// Small fixtures shared by the test binaries.
#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "aquah/common.hpp"
#include "aquah/grid.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("aquah_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline aquah::GridSpec spec(std::size_t rows, std::size_t cols, double cell = 1.0) {
  aquah::GridSpec s;
  s.rows = rows;
  s.cols = cols;
  s.cell_size = cell;
  return s;
}

inline aquah::Raster raster(std::size_t rows, std::size_t cols, std::vector<double> v, double cell = 1.0) {
  return aquah::Raster(spec(rows, cols, cell), std::move(v));
}

}  // namespace testing
