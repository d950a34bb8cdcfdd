#include "metapipe/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "metapipe/textio.hpp"

namespace metapipe {
namespace {

constexpr std::size_t kMaxSweeps = 100;
constexpr double kOffDiagonalTolerance = 1e-11;
constexpr double kSymmetryTolerance = 1e-9;

void canonicalize_sign(std::span<double> v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (!v.empty() && v[arg] < 0.0)
    for (auto& x : v) x = -x;
}

double frobenius(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double max_off_diagonal(const Matrix& a) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) m = std::max(m, std::abs(a(p, q)));
  return m;
}

// Copy of z with every column mean subtracted.
Matrix centred(const Matrix& z) {
  Matrix out = z;
  const double n = static_cast<double>(z.rows());
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) mean += z(r, c);
    mean /= n;
    for (std::size_t r = 0; r < z.rows(); ++r) out(r, c) -= mean;
  }
  return out;
}

Matrix gram_matrix(const Matrix& z) {
  const std::size_t n = z.rows();
  Matrix g(n, n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto ri = z.row(i);
    for (std::size_t j = i; j < n; ++j) {
      auto rj = z.row(j);
      const double s = std::inner_product(ri.begin(), ri.end(), rj.begin(), 0.0) / denom;
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

// Eigenvectors of Z^T Z / (N-1) from those of Z Z^T / (N-1); false when the
// requested spectrum reaches the numerical null space.
bool components_from_gram(const Matrix& z, std::size_t k, Matrix& components,
                          std::vector<double>& values) {
  const auto eig = eig_symmetric(gram_matrix(z));
  if (k > eig.values.size() || eig.values[0] <= 0.0) return false;
  if (eig.values[k - 1] <= 1e-8 * eig.values[0]) return false;

  const std::size_t d = z.cols();
  components = Matrix(k, d);
  values.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(k));
  for (std::size_t j = 0; j < k; ++j) {
    auto v = components.row(j);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      const double u = eig.vectors(r, j);
      auto zr = z.row(r);
      for (std::size_t c = 0; c < d; ++c) v[c] += u * zr[c];
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (auto& x : v) x /= norm;
    canonicalize_sign(v);
  }
  return true;
}

}  // namespace

StandardizationParams standardize_fit(const Matrix& x) {
  if (x.rows() < 2) throw Error("standardize_fit: need at least 2 rows");
  const std::size_t n = x.rows();
  StandardizationParams p{std::vector<double>(x.cols(), 0.0), std::vector<double>(x.cols(), 0.0)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) p.means[c] += x(r, c);
  for (auto& m : p.means) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double dev = x(r, c) - p.means[c];
      p.stds[c] += dev * dev;
    }
  }
  for (auto& s : p.stds) s = std::sqrt(s / static_cast<double>(n - 1));
  return p;
}

Matrix standardize_apply(const Matrix& x, const StandardizationParams& params) {
  if (x.cols() != params.means.size() || params.stds.size() != params.means.size()) {
    throw Error("standardize_apply: matrix has " + std::to_string(x.cols()) +
                " columns, parameters cover " + std::to_string(params.means.size()));
  }
  Matrix z(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double s = params.stds[c];
      z(r, c) = s > 0.0 ? (x(r, c) - params.means[c]) / s : 0.0;
    }
  }
  return z;
}

Matrix covariance_matrix(const Matrix& z) {
  if (z.rows() < 2) throw Error("covariance_matrix: need at least 2 rows");
  const Matrix zc = centred(z);
  const std::size_t d = z.cols();
  Matrix c(d, d);
  for (std::size_t r = 0; r < zc.rows(); ++r) {
    auto row = zc.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      const double zi = row[i];
      if (zi == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) c(i, j) += zi * row[j];
    }
  }
  const double denom = static_cast<double>(z.rows() - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      c(i, j) /= denom;
      c(j, i) = c(i, j);
    }
  }
  return c;
}

EigenDecomposition eig_symmetric(const Matrix& c) {
  if (c.rows() != c.cols()) throw Error("eig_symmetric: matrix is not square");
  if (!c.all_finite()) throw Error("eig_symmetric: matrix has non-finite entries");
  const std::size_t n = c.rows();
  double scale = 1.0;
  for (double v : c.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(c(i, j) - c(j, i)) > kSymmetryTolerance * scale) {
        throw Error("eig_symmetric: matrix is not symmetric at (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")");
      }
    }
  }

  Matrix a = c;
  Matrix v = Matrix::identity(n);
  const double threshold = kOffDiagonalTolerance * frobenius(c);
  std::size_t sweep = 0;
  for (;; ++sweep) {
    if (max_off_diagonal(a) <= threshold) break;
    if (sweep == kMaxSweeps) {
      throw Error("eig_symmetric: no convergence after " + std::to_string(kMaxSweeps) +
                  " sweeps, largest off-diagonal " + textio::g17(max_off_diagonal(a)));
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double g = a(k, p);
          const double h = a(k, q);
          a(k, p) = cs * g - sn * h;
          a(p, k) = a(k, p);
          a(k, q) = sn * g + cs * h;
          a(q, k) = a(k, q);
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double g = v(k, p);
          const double h = v(k, q);
          v(k, p) = cs * g - sn * h;
          v(k, q) = sn * g + cs * h;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out{std::vector<double>(n), Matrix(n, n), sweep};
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a(src, src);
    for (std::size_t k = 0; k < n; ++k) col[k] = v(k, src);
    canonicalize_sign(col);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = col[k];
  }
  return out;
}

PcaModel pca_fit(const Matrix& x, std::size_t k) {
  if (x.rows() < 2) throw Error("pca_fit: need at least 2 rows");
  const std::size_t d = x.cols();
  if (k < 1 || k > d) {
    throw Error("pca_fit: component count " + std::to_string(k) + " outside [1, " +
                std::to_string(d) + "]");
  }
  PcaModel model;
  model.params = standardize_fit(x);
  const Matrix z = centred(standardize_apply(x, model.params));
  const std::size_t n = x.rows();

  double trace = 0.0;
  for (double v : z.data()) trace += v * v;
  trace /= static_cast<double>(n - 1);

  if (n - 1 < d && k <= n - 1 && components_from_gram(z, k, model.components, model.eigenvalues)) {
    model.total_variance = trace;
  } else {
    const auto eig = eig_symmetric(covariance_matrix(z));
    model.components = Matrix(k, d);
    model.eigenvalues.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      model.eigenvalues[j] = eig.values[j];
      for (std::size_t c = 0; c < d; ++c) model.components(j, c) = eig.vectors(c, j);
    }
    model.total_variance = 0.0;
    for (double ev : eig.values) model.total_variance += std::max(ev, 0.0);
  }
  for (auto& ev : model.eigenvalues) ev = std::max(ev, 0.0);
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.feature_count()) {
    throw Error("pca_transform: matrix has " + std::to_string(x.cols()) +
                " columns, model expects " + std::to_string(model.feature_count()));
  }
  const Matrix z = standardize_apply(x, model.params);
  const std::size_t k = model.component_count();
  Matrix scores(x.rows(), k);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto zr = z.row(r);
    for (std::size_t j = 0; j < k; ++j) {
      auto comp = model.components.row(j);
      scores(r, j) = std::inner_product(zr.begin(), zr.end(), comp.begin(), 0.0);
    }
  }
  return scores;
}

std::vector<double> explained_variance_ratio(const PcaModel& model) {
  if (!(model.total_variance > 0.0))
    throw Error("explained_variance_ratio: total variance is zero");
  std::vector<double> out;
  out.reserve(model.eigenvalues.size());
  for (double ev : model.eigenvalues) out.push_back(ev / model.total_variance);
  return out;
}

RgbImage component_to_image(const PcaModel& model, std::size_t index, std::size_t height,
                            std::size_t width) {
  if (index >= model.component_count()) {
    throw Error("component_to_image: index " + std::to_string(index) + " but model has " +
                std::to_string(model.component_count()) + " components");
  }
  if (height * width * 3 != model.feature_count()) {
    throw Error("component_to_image: " + std::to_string(height) + "x" + std::to_string(width) +
                "x3 does not match " + std::to_string(model.feature_count()) + " features");
  }
  const auto row = model.components.row(index);
  const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
  const double m = *lo;
  const double span = *hi - *lo;
  RgbImage img{height, width, std::vector<std::uint8_t>(row.size(), 128)};
  if (span > 0.0) {
    for (std::size_t i = 0; i < row.size(); ++i)
      img.pixels[i] = static_cast<std::uint8_t>(std::lround((row[i] - m) / span * 255.0));
  }
  return img;
}

void save_pca_model(const std::filesystem::path& path, const PcaModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "metapipe-pca v1\n";
  out << "features " << model.feature_count() << '\n';
  out << "components " << model.component_count() << '\n';
  out << "total_variance " << textio::g17(model.total_variance) << '\n';
  out << "means " << textio::join(model.params.means) << '\n';
  out << "stds " << textio::join(model.params.stds) << '\n';
  out << "eigenvalues " << textio::join(model.eigenvalues) << '\n';
  for (std::size_t j = 0; j < model.component_count(); ++j)
    out << "component " << textio::join(model.components.row(j)) << '\n';
}

PcaModel load_pca_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "metapipe-pca v1") throw Error(path.string() + ": not a metapipe-pca v1 file");
  using namespace textio;
  auto one = [&](const char* key) {
    auto t = expect_line(in, key);
    if (t.size() != 1) throw Error(path.string() + ": malformed '" + key + "' line");
    return t[0];
  };
  const std::size_t d = to_size(one("features"));
  const std::size_t k = to_size(one("components"));
  PcaModel m;
  m.total_variance = to_double(one("total_variance"));
  m.params.means = to_doubles(expect_line(in, "means"), d);
  m.params.stds = to_doubles(expect_line(in, "stds"), d);
  m.eigenvalues = to_doubles(expect_line(in, "eigenvalues"), k);
  std::vector<double> comps;
  comps.reserve(k * d);
  for (std::size_t j = 0; j < k; ++j) {
    auto row = to_doubles(expect_line(in, "component"), d);
    comps.insert(comps.end(), row.begin(), row.end());
  }
  m.components = Matrix(k, d, std::move(comps));
  return m;
}

}  // namespace metapipe
