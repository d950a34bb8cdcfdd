#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "metapipe/core.hpp"

namespace metapipe {

// ---- k-nearest neighbours -------------------------------------------------

double euclidean_distance(std::span<const double> p, std::span<const double> q);

/// Stores the training set verbatim.
struct KnnModel {
  Matrix train_x;
  Labels train_y;
  std::size_t k = 1;
};

KnnModel knn_fit(Matrix x, Labels y, std::size_t k);

/// Majority vote over the k nearest rows (distance ties go to the lower
/// training index). On a split vote the farthest neighbour is dropped until
/// one label has a strict majority.
Labels knn_predict(const KnnModel& model, const Matrix& x);

/// round(sqrt(n_train)), at least 1.
std::size_t knn_suggest_k(std::size_t n_train);

// ---- logistic regression --------------------------------------------------

double sigmoid(double x);

enum class LogRegSolver { kBatch, kSag };

struct LogRegParams {
  double learning_rate = 0.1;
  std::size_t max_iter = 1000;
  double tolerance = 1e-6;
  double l2_strength = 1e-4;
  LogRegSolver solver = LogRegSolver::kBatch;
  /// Drives sample order for the stochastic-average solver.
  std::uint64_t seed = 0;
};

struct LogRegModel {
  /// weights[0] is the intercept.
  std::vector<double> weights;
  LogRegParams params;
  std::size_t iterations = 0;
};

/// Mean log-loss plus (l2/2) * ||theta[1..D]||^2.
double logreg_loss(const Matrix& x, const Labels& y, std::span<const double> theta, double l2);
/// X^T (sigma(X theta) - y) / N + l2 * theta, with the intercept unregularized.
std::vector<double> logreg_gradient(const Matrix& x, const Labels& y,
                                    std::span<const double> theta, double l2);

/// Full-batch gradient descent, or the stochastic-average-gradient variant
/// (max_iter then counts epochs). Stops once the gradient infinity-norm is
/// within tolerance. When `loss_trace` is given, it receives the loss before
/// every batch iteration or after every epoch.
LogRegModel logreg_fit(const Matrix& x, const Labels& y, const LogRegParams& params,
                       std::vector<double>* loss_trace = nullptr);

/// Label 1 iff the linear score is strictly positive.
Labels logreg_predict(const LogRegModel& model, const Matrix& x);

// ---- decision tree --------------------------------------------------------

enum class ImpurityKind { kGini, kEntropy };

struct ClassCounts {
  std::size_t n0 = 0;
  std::size_t n1 = 0;

  std::size_t total() const { return n0 + n1; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

double impurity(ClassCounts counts, ImpurityKind kind);
double information_gain(ClassCounts parent, ClassCounts left, ClassCounts right,
                        ImpurityKind kind);

struct TreeParams {
  static constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
  ImpurityKind impurity = ImpurityKind::kGini;
};

struct TreeNode {
  bool leaf = true;
  // Internal nodes: rows with x[feature] <= threshold go left.
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  double gain = 0.0;
  // Leaves.
  std::uint8_t label = 0;
  ClassCounts counts;
};

/// Nodes in preorder; nodes[0] is the root and an internal node's left child
/// immediately follows it.
struct TreeModel {
  std::vector<TreeNode> nodes;
  TreeParams params;
  std::size_t feature_count = 0;

  std::size_t depth() const;
};

TreeModel tree_fit(const Matrix& x, const Labels& y, const TreeParams& params);
Labels tree_predict(const TreeModel& model, const Matrix& x);

// ---- persistence ----------------------------------------------------------

void save_knn_model(const std::filesystem::path& path, const KnnModel& model);
KnnModel load_knn_model(const std::filesystem::path& path);
void save_logreg_model(const std::filesystem::path& path, const LogRegModel& model);
LogRegModel load_logreg_model(const std::filesystem::path& path);
void save_tree_model(const std::filesystem::path& path, const TreeModel& model);
TreeModel load_tree_model(const std::filesystem::path& path);

std::string to_string(ImpurityKind kind);
ImpurityKind parse_impurity(const std::string& s);
std::string to_string(LogRegSolver solver);
LogRegSolver parse_solver(const std::string& s);

}  // namespace metapipe
