#include <algorithm>
#include <cmath>
#include <numeric>

#include "metapipe/classifiers.hpp"

namespace metapipe {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double margin(std::span<const double> row, std::span<const double> theta) {
  double z = theta[0];
  for (std::size_t j = 0; j < row.size(); ++j) z += theta[j + 1] * row[j];
  return z;
}

void check_inputs(const Matrix& x, const Labels& y, std::span<const double> theta) {
  if (x.rows() != y.size()) throw Error("logistic regression: feature and label counts differ");
  if (theta.size() != x.cols() + 1) throw Error("logistic regression: weight count mismatch");
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logreg_loss(const Matrix& x, const Labels& y, std::span<const double> theta, double l2) {
  check_inputs(x, y, theta);
  if (x.rows() == 0) throw Error("logreg_loss: no samples");
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double z = margin(x.row(i), theta);
    loss += softplus(z) - (y[i] ? z : 0.0);
  }
  loss /= static_cast<double>(x.rows());
  double reg = 0.0;
  for (std::size_t j = 1; j < theta.size(); ++j) reg += theta[j] * theta[j];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> logreg_gradient(const Matrix& x, const Labels& y,
                                    std::span<const double> theta, double l2) {
  check_inputs(x, y, theta);
  if (x.rows() == 0) throw Error("logreg_gradient: no samples");
  std::vector<double> g(theta.size(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double r = sigmoid(margin(row, theta)) - y[i];
    g[0] += r;
    for (std::size_t j = 0; j < row.size(); ++j) g[j + 1] += r * row[j];
  }
  const double n = static_cast<double>(x.rows());
  for (auto& v : g) v /= n;
  for (std::size_t j = 1; j < g.size(); ++j) g[j] += l2 * theta[j];
  return g;
}

LogRegModel logreg_fit(const Matrix& x, const Labels& y, const LogRegParams& params,
                       std::vector<double>* loss_trace) {
  if (x.rows() != y.size()) throw Error("logreg_fit: feature and label counts differ");
  if (x.rows() == 0) throw Error("logreg_fit: no samples");
  validate_labels(y);
  if (!(params.learning_rate > 0.0)) throw Error("logreg_fit: learning rate must be positive");
  if (params.l2_strength < 0.0) throw Error("logreg_fit: l2 strength must be non-negative");

  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  LogRegModel model{std::vector<double>(d + 1, 0.0), params, 0};
  auto& theta = model.weights;

  auto checked_loss = [&](std::size_t iter) {
    const double loss = logreg_loss(x, y, theta, params.l2_strength);
    if (!std::isfinite(loss))
      throw Error("logreg_fit: loss became non-finite at iteration " + std::to_string(iter));
    if (loss_trace) loss_trace->push_back(loss);
    return loss;
  };

  if (params.solver == LogRegSolver::kBatch) {
    for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
      checked_loss(iter);
      const auto g = logreg_gradient(x, y, theta, params.l2_strength);
      if (max_abs(g) <= params.tolerance) break;
      for (std::size_t j = 0; j <= d; ++j) theta[j] -= params.learning_rate * g[j];
      model.iterations = iter + 1;
    }
    checked_loss(model.iterations);
    return model;
  }

  // Stochastic average gradient: keep the last residual seen for every sample
  // and step along the average of the stored per-sample gradients.
  double max_sq_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    max_sq_norm = std::max(max_sq_norm, 1.0 + std::inner_product(row.begin(), row.end(),
                                                                 row.begin(), 0.0));
  }
  const double lipschitz = 0.25 * max_sq_norm + params.l2_strength;
  const double step = std::min(params.learning_rate, 1.0 / lipschitz);

  Rng rng(params.seed);
  std::vector<double> residual(n, 0.0);
  std::vector<double> sum(d + 1, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t epoch = 0; epoch < params.max_iter; ++epoch) {
    for (std::size_t s = 0; s < n; ++s) {
      const auto i = static_cast<std::size_t>(rng.next_range(n));
      const auto row = x.row(i);
      const double r = sigmoid(margin(row, theta)) - y[i];
      const double delta = r - residual[i];
      residual[i] = r;
      sum[0] += delta;
      for (std::size_t j = 0; j < d; ++j) sum[j + 1] += delta * row[j];
      theta[0] -= step * sum[0] * inv_n;
      for (std::size_t j = 1; j <= d; ++j)
        theta[j] -= step * (sum[j] * inv_n + params.l2_strength * theta[j]);
    }
    model.iterations = epoch + 1;
    checked_loss(epoch);
    if (max_abs(logreg_gradient(x, y, theta, params.l2_strength)) <= params.tolerance) break;
  }
  return model;
}

Labels logreg_predict(const LogRegModel& model, const Matrix& x) {
  if (model.weights.size() != x.cols() + 1) {
    throw Error("logreg_predict: rows have " + std::to_string(x.cols()) + " features, model has " +
                std::to_string(model.weights.size() - 1));
  }
  Labels out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = margin(x.row(i), model.weights) > 0.0;
  return out;
}

}  // namespace metapipe
