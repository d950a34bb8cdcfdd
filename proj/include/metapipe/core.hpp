#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace metapipe {

/// Base error for every rejected input or failed stage in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  Matrix transposed() const;
  /// Copies the given rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;
  /// Copies the given columns, in the given order.
  Matrix select_cols(std::span<const std::size_t> indices) const;
  /// Appends a column filled with `value` on the right.
  Matrix with_constant_column(double value) const;

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

/// Binary class labels; every entry is 0 or 1.
using Labels = std::vector<std::uint8_t>;

/// Throws unless every label is 0 or 1.
void validate_labels(std::span<const std::uint8_t> labels);

/// splitmix64 generator. A value type: copy it to fork a stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_f64();
  /// Uniform in [0, n) by rejection sampling; n must be positive.
  std::uint64_t next_range(std::uint64_t n);
  /// Standard normal deviate via Box-Muller.
  double next_gaussian();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// One splitmix64 step over `seed + stream`; used to derive independent
/// per-stage and per-worker seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Fraction of positions where the two label vectors agree.
double accuracy(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);

struct Split {
  Matrix train_x;
  Labels train_y;
  Matrix test_x;
  Labels test_y;
  /// Original row indices of the train and test rows.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Fisher-Yates shuffle of row indices, then the first ceil(N * test_fraction)
/// rows become the test set.
Split train_test_split(const Matrix& x, const Labels& y, double test_fraction, Rng& rng);

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace metapipe
