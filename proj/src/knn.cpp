#include <algorithm>
#include <cmath>
#include <numeric>

#include "metapipe/classifiers.hpp"

namespace metapipe {

double euclidean_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error("euclidean_distance: length mismatch (" + std::to_string(p.size()) + " vs " +
                std::to_string(q.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return std::sqrt(s);
}

KnnModel knn_fit(Matrix x, Labels y, std::size_t k) {
  if (x.rows() != y.size()) throw Error("knn_fit: feature and label counts differ");
  validate_labels(y);
  if (k < 1 || k > x.rows()) {
    throw Error("knn_fit: k = " + std::to_string(k) + " outside [1, " +
                std::to_string(x.rows()) + "]");
  }
  return {std::move(x), std::move(y), k};
}

Labels knn_predict(const KnnModel& model, const Matrix& x) {
  if (x.rows() == 0) return {};
  if (x.cols() != model.train_x.cols()) {
    throw Error("knn_predict: test rows have " + std::to_string(x.cols()) +
                " features, model has " + std::to_string(model.train_x.cols()));
  }
  const std::size_t n = model.train_x.rows();
  const std::size_t k = model.k;
  if (k < 1 || k > n) throw Error("knn_predict: invalid k");

  Labels out(x.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t i = 0; i < n; ++i) dist[i] = {euclidean_distance(row, model.train_x.row(i)), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    std::size_t m = k;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < m; ++i) ones += model.train_y[dist[i].second];
    while (2 * ones == m) {
      --m;
      ones -= model.train_y[dist[m].second];
    }
    out[r] = 2 * ones > m ? 1 : 0;
  }
  return out;
}

std::size_t knn_suggest_k(std::size_t n_train) {
  if (n_train < 1) throw Error("knn_suggest_k: need at least one training row");
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_train))));
  return std::max<std::size_t>(k, 1);
}

}  // namespace metapipe
