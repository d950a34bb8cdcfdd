#include <algorithm>
#include <cmath>
#include <numeric>

#include "metapipe/classifiers.hpp"

namespace metapipe {
namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Labels& y, const TreeParams& params)
      : x_(x), y_(y), params_(params) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> rows(x_.rows());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  ClassCounts count(std::span<const std::size_t> rows) const {
    ClassCounts c;
    for (auto r : rows) (y_[r] ? c.n1 : c.n0)++;
    return c;
  }

  SplitChoice best_split(std::span<const std::size_t> rows, ClassCounts parent) const {
    SplitChoice best;
    std::vector<std::pair<double, std::uint8_t>> column(rows.size());
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(column.begin(), column.end());
      ClassCounts left;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        (column[i].second ? left.n1 : left.n0)++;
        const double lo = column[i].first;
        const double hi = column[i + 1].first;
        if (lo == hi) continue;
        const ClassCounts right{parent.n0 - left.n0, parent.n1 - left.n1};
        const double gain = information_gain(parent, left, right, params_.impurity);
        if (!best.found || gain > best.gain) {
          double t = lo + (hi - lo) / 2.0;
          if (!(t < hi)) t = lo;
          best = {true, f, t, gain};
        }
      }
    }
    return best;
  }

  std::size_t grow(std::span<std::size_t> rows, std::size_t depth) {
    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    const ClassCounts counts = count(rows);
    TreeNode node;
    node.counts = counts;
    node.label = counts.n1 > counts.n0 ? 1 : 0;

    const bool pure = counts.n0 == 0 || counts.n1 == 0;
    if (pure || depth >= params_.max_depth || rows.size() < params_.min_samples_split) {
      nodes_[index] = node;
      return index;
    }
    const SplitChoice split = best_split(rows, counts);
    if (!split.found || !(split.gain > 0.0)) {
      nodes_[index] = node;
      return index;
    }

    auto mid = std::stable_partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return x_(r, split.feature) <= split.threshold;
    });
    const auto n_left = static_cast<std::size_t>(mid - rows.begin());
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.gain = split.gain;
    nodes_[index] = node;
    nodes_[index].left = grow(rows.subspan(0, n_left), depth + 1);
    nodes_[index].right = grow(rows.subspan(n_left), depth + 1);
    return index;
  }

  const Matrix& x_;
  const Labels& y_;
  const TreeParams& params_;
  std::vector<TreeNode> nodes_;
};

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

double impurity(ClassCounts counts, ImpurityKind kind) {
  const std::size_t n = counts.total();
  if (n == 0) throw Error("impurity: empty class counts");
  const double p0 = static_cast<double>(counts.n0) / static_cast<double>(n);
  const double p1 = static_cast<double>(counts.n1) / static_cast<double>(n);
  if (kind == ImpurityKind::kGini) return 1.0 - p0 * p0 - p1 * p1;
  return -(plogp(p0) + plogp(p1));
}

double information_gain(ClassCounts parent, ClassCounts left, ClassCounts right,
                        ImpurityKind kind) {
  if (left.n0 + right.n0 != parent.n0 || left.n1 + right.n1 != parent.n1)
    throw Error("information_gain: child counts do not sum to the parent");
  if (left.total() == 0 || right.total() == 0)
    throw Error("information_gain: empty child");
  const double n = static_cast<double>(parent.total());
  return impurity(parent, kind) -
         static_cast<double>(left.total()) / n * impurity(left, kind) -
         static_cast<double>(right.total()) / n * impurity(right, kind);
}

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].leaf) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return deepest;
}

TreeModel tree_fit(const Matrix& x, const Labels& y, const TreeParams& params) {
  if (x.rows() != y.size()) throw Error("tree_fit: feature and label counts differ");
  if (x.rows() == 0) throw Error("tree_fit: no samples");
  validate_labels(y);
  TreeModel model;
  model.params = params;
  model.feature_count = x.cols();
  model.nodes = TreeBuilder(x, y, params).build();
  return model;
}

Labels tree_predict(const TreeModel& model, const Matrix& x) {
  if (x.cols() != model.feature_count) {
    throw Error("tree_predict: rows have " + std::to_string(x.cols()) + " features, model has " +
                std::to_string(model.feature_count));
  }
  if (model.nodes.empty()) throw Error("tree_predict: empty tree");
  Labels out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::size_t i = 0;
    while (!model.nodes[i].leaf) {
      const auto& n = model.nodes[i];
      i = x(r, n.feature) <= n.threshold ? n.left : n.right;
    }
    out[r] = model.nodes[i].label;
  }
  return out;
}

}  // namespace metapipe
