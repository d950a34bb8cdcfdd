#include "metapipe/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace metapipe {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error("matrix data length " + std::to_string(data_.size()) + " does not match " +
                std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw Error("row index out of range");
    std::copy_n(row(indices[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> indices) const {
  Matrix out(rows_, indices.size());
  for (std::size_t c : indices)
    if (c >= cols_) throw Error("column index out of range");
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t j = 0; j < indices.size(); ++j) out(r, j) = (*this)(r, indices[j]);
  return out;
}

Matrix Matrix::with_constant_column(double value) const {
  Matrix out(rows_, cols_ + 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::copy_n(row(r).begin(), cols_, out.row(r).begin());
    out(r, cols_) = value;
  }
  return out;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

void validate_labels(std::span<const std::uint8_t> labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) {
      throw Error("label at position " + std::to_string(i) + " is " +
                  std::to_string(labels[i]) + ", expected 0 or 1");
    }
  }
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::next_f64() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_range(std::uint64_t n) {
  if (n == 0) throw Error("next_range: empty range");
  // 2^64 mod n; values below it would bias the low residues.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % n;
  }
}

double Rng::next_gaussian() {
  double u1 = next_f64();
  while (u1 <= 0.0) u1 = next_f64();
  const double u2 = next_f64();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng r(seed + stream);
  return r.next_u64();
}

double accuracy(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) {
    throw Error("accuracy: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                std::to_string(actual.size()) + ")");
  }
  if (predicted.empty()) throw Error("accuracy: empty input");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) agree += predicted[i] == actual[i];
  return static_cast<double>(agree) / static_cast<double>(predicted.size());
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_range(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

Split train_test_split(const Matrix& x, const Labels& y, double test_fraction, Rng& rng) {
  if (x.rows() != y.size()) throw Error("train_test_split: feature and label counts differ");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error("train_test_split: test fraction must lie in (0, 1)");
  const std::size_t n = x.rows();
  if (n < 2) throw Error("train_test_split: need at least 2 rows");
  const auto n_test = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * test_fraction));
  if (n_test >= n) throw Error("train_test_split: split leaves no training rows");

  const auto perm = shuffled_indices(n, rng);
  Split s;
  s.test_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  s.train_x = x.select_rows(s.train_rows);
  s.test_x = x.select_rows(s.test_rows);
  for (auto r : s.train_rows) s.train_y.push_back(y[r]);
  for (auto r : s.test_rows) s.test_y.push_back(y[r]);
  return s;
}

}  // namespace metapipe
