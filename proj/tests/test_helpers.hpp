#pragma once

#include <filesystem>
#include <string>

#include "metapipe/core.hpp"

namespace metapipe::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = lo + (hi - lo) * rng.next_f64();
  return m;
}

inline Matrix random_symmetric(std::size_t n, Rng& rng, double lo = -10.0, double hi = 10.0) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      m(i, j) = lo + (hi - lo) * rng.next_f64();
      m(j, i) = m(i, j);
    }
  }
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("metapipe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace metapipe::test
