#pragma once

#include <filesystem>
#include <vector>

#include "metapipe/core.hpp"
#include "metapipe/image.hpp"

namespace metapipe {

struct StandardizationParams {
  std::vector<double> means;
  /// Sample standard deviations (divisor N-1); zero for constant columns.
  std::vector<double> stds;

  friend bool operator==(const StandardizationParams&, const StandardizationParams&) = default;
};

StandardizationParams standardize_fit(const Matrix& x);

/// z = (x - mean) / std per entry. Constant columns map to zero.
Matrix standardize_apply(const Matrix& x, const StandardizationParams& params);

/// Sample covariance Z^T Z / (N-1) of the column-centred input.
Matrix covariance_matrix(const Matrix& z);

struct EigenDecomposition {
  /// Non-increasing; ties keep original diagonal order.
  std::vector<double> values;
  /// Column j is the unit eigenvector for values[j], largest-magnitude entry positive.
  Matrix vectors;
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Sweeps until every
/// off-diagonal entry is at most 1e-11 * ||C||_F, giving up after 100 sweeps.
EigenDecomposition eig_symmetric(const Matrix& c);

struct PcaModel {
  StandardizationParams params;
  /// k x D, rows are orthonormal principal axes.
  Matrix components;
  /// k values, non-increasing, clamped at zero.
  std::vector<double> eigenvalues;
  /// Sum of all D eigenvalues (trace of the covariance).
  double total_variance = 0.0;

  std::size_t feature_count() const { return params.means.size(); }
  std::size_t component_count() const { return eigenvalues.size(); }

  friend bool operator==(const PcaModel&, const PcaModel&) = default;
};

/// Standardize, form the covariance, eigendecompose and keep the top k pairs.
/// When there are fewer samples than features the N x N Gram matrix is
/// decomposed instead and its eigenvectors mapped back through Z^T.
PcaModel pca_fit(const Matrix& x, std::size_t k);

/// Scores: standardize_apply(x) * components^T, N x k.
Matrix pca_transform(const PcaModel& model, const Matrix& x);

std::vector<double> explained_variance_ratio(const PcaModel& model);

/// Min-max rescales component `index` to [0, 255] (constant rows become 128)
/// and lays it out in flatten order.
RgbImage component_to_image(const PcaModel& model, std::size_t index, std::size_t height,
                            std::size_t width);

void save_pca_model(const std::filesystem::path& path, const PcaModel& model);
PcaModel load_pca_model(const std::filesystem::path& path);

}  // namespace metapipe
