#include <fstream>
#include <functional>
#include <sstream>

#include "metapipe/classifiers.hpp"
#include "metapipe/textio.hpp"

namespace metapipe {
namespace {

using namespace textio;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != header) throw Error(path.string() + ": expected header '" + header + "'");
  return in;
}

std::string single(std::istream& in, const std::string& key) {
  auto t = expect_line(in, key);
  if (t.size() != 1) throw Error("model file: malformed '" + key + "' line");
  return t[0];
}

std::uint8_t parse_label(const std::string& s) {
  if (s != "0" && s != "1") throw Error("model file: label '" + s + "' is not 0 or 1");
  return s == "1";
}

}  // namespace

std::string to_string(ImpurityKind kind) { return kind == ImpurityKind::kGini ? "gini" : "entropy"; }

ImpurityKind parse_impurity(const std::string& s) {
  if (s == "gini") return ImpurityKind::kGini;
  if (s == "entropy") return ImpurityKind::kEntropy;
  throw Error("unknown impurity '" + s + "' (expected gini or entropy)");
}

std::string to_string(LogRegSolver solver) { return solver == LogRegSolver::kBatch ? "batch" : "sag"; }

LogRegSolver parse_solver(const std::string& s) {
  if (s == "batch") return LogRegSolver::kBatch;
  if (s == "sag" || s == "saga") return LogRegSolver::kSag;
  throw Error("unknown solver '" + s + "' (expected batch or sag)");
}

void save_knn_model(const std::filesystem::path& path, const KnnModel& model) {
  auto out = open_out(path);
  out << "metapipe-knn v1\n";
  out << "k " << model.k << '\n';
  out << "features " << model.train_x.cols() << '\n';
  out << "samples " << model.train_x.rows() << '\n';
  for (std::size_t i = 0; i < model.train_x.rows(); ++i) {
    out << "sample " << static_cast<int>(model.train_y[i]);
    if (model.train_x.cols() > 0) out << ' ' << join(model.train_x.row(i));
    out << '\n';
  }
}

KnnModel load_knn_model(const std::filesystem::path& path) {
  auto in = open_in(path, "metapipe-knn v1");
  const auto k = to_size(single(in, "k"));
  const auto d = to_size(single(in, "features"));
  const auto n = to_size(single(in, "samples"));
  std::vector<double> data;
  Labels y;
  for (std::size_t i = 0; i < n; ++i) {
    auto t = expect_line(in, "sample");
    if (t.empty()) throw Error("model file: sample line without label");
    y.push_back(parse_label(t[0]));
    t.erase(t.begin());
    auto row = to_doubles(t, d);
    data.insert(data.end(), row.begin(), row.end());
  }
  return knn_fit(Matrix(n, d, std::move(data)), std::move(y), k);
}

void save_logreg_model(const std::filesystem::path& path, const LogRegModel& model) {
  auto out = open_out(path);
  const auto& p = model.params;
  out << "metapipe-logreg v1\n";
  out << "features " << model.weights.size() - 1 << '\n';
  out << "solver " << to_string(p.solver) << '\n';
  out << "learning_rate " << g17(p.learning_rate) << '\n';
  out << "max_iter " << p.max_iter << '\n';
  out << "tolerance " << g17(p.tolerance) << '\n';
  out << "l2_strength " << g17(p.l2_strength) << '\n';
  out << "seed " << p.seed << '\n';
  out << "iterations " << model.iterations << '\n';
  out << "weights " << join(model.weights) << '\n';
}

LogRegModel load_logreg_model(const std::filesystem::path& path) {
  auto in = open_in(path, "metapipe-logreg v1");
  LogRegModel m;
  const auto d = to_size(single(in, "features"));
  m.params.solver = parse_solver(single(in, "solver"));
  m.params.learning_rate = to_double(single(in, "learning_rate"));
  m.params.max_iter = to_size(single(in, "max_iter"));
  m.params.tolerance = to_double(single(in, "tolerance"));
  m.params.l2_strength = to_double(single(in, "l2_strength"));
  m.params.seed = to_size(single(in, "seed"));
  m.iterations = to_size(single(in, "iterations"));
  m.weights = to_doubles(expect_line(in, "weights"), d + 1);
  return m;
}

void save_tree_model(const std::filesystem::path& path, const TreeModel& model) {
  auto out = open_out(path);
  const auto& p = model.params;
  out << "metapipe-tree v1\n";
  out << "features " << model.feature_count << '\n';
  out << "max_depth "
      << (p.max_depth == TreeParams::kUnlimitedDepth ? std::string("unlimited")
                                                     : std::to_string(p.max_depth))
      << '\n';
  out << "min_samples_split " << p.min_samples_split << '\n';
  out << "impurity " << to_string(p.impurity) << '\n';
  out << "nodes " << model.nodes.size() << '\n';
  // Preorder: the left subtree of an internal node follows it directly, then the right.
  std::function<void(std::size_t)> emit = [&](std::size_t i) {
    const auto& n = model.nodes[i];
    if (n.leaf) {
      out << "leaf " << static_cast<int>(n.label) << ' ' << n.counts.n0 << ' ' << n.counts.n1
          << '\n';
      return;
    }
    out << "split " << n.feature << ' ' << g17(n.threshold) << ' ' << g17(n.gain) << ' '
        << n.counts.n0 << ' ' << n.counts.n1 << '\n';
    emit(n.left);
    emit(n.right);
  };
  if (!model.nodes.empty()) emit(0);
}

TreeModel load_tree_model(const std::filesystem::path& path) {
  auto in = open_in(path, "metapipe-tree v1");
  TreeModel m;
  m.feature_count = to_size(single(in, "features"));
  const auto depth = single(in, "max_depth");
  m.params.max_depth = depth == "unlimited" ? TreeParams::kUnlimitedDepth : to_size(depth);
  m.params.min_samples_split = to_size(single(in, "min_samples_split"));
  m.params.impurity = parse_impurity(single(in, "impurity"));
  const auto count = to_size(single(in, "nodes"));

  std::function<std::size_t()> read = [&]() -> std::size_t {
    if (m.nodes.size() >= count) throw Error("model file: more nodes than declared");
    std::string line;
    while (std::getline(in, line) && line.empty()) {}
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    std::vector<std::string> t;
    for (std::string s; ls >> s;) t.push_back(s);
    const std::size_t index = m.nodes.size();
    m.nodes.emplace_back();
    TreeNode node;
    if (kind == "leaf" && t.size() == 3) {
      node.label = parse_label(t[0]);
      node.counts = {to_size(t[1]), to_size(t[2])};
      m.nodes[index] = node;
      return index;
    }
    if (kind != "split" || t.size() != 5) throw Error("model file: malformed tree node '" + line + "'");
    node.leaf = false;
    node.feature = to_size(t[0]);
    if (node.feature >= m.feature_count) throw Error("model file: split feature out of range");
    node.threshold = to_double(t[1]);
    node.gain = to_double(t[2]);
    node.counts = {to_size(t[3]), to_size(t[4])};
    node.label = node.counts.n1 > node.counts.n0 ? 1 : 0;
    m.nodes[index] = node;
    const auto left = read();
    const auto right = read();
    m.nodes[index].left = left;
    m.nodes[index].right = right;
    return index;
  };
  if (count > 0) read();
  if (m.nodes.size() != count) throw Error("model file: node count mismatch");
  return m;
}

}  // namespace metapipe
