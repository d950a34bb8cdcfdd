#include "metapipe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace metapipe {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  double v;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end;
}

double parse_double(const std::string& s, const std::string& context) {
  double v;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw Error(context + ": invalid number '" + s + "'");
  return v;
}

}  // namespace

std::vector<LabelRow> read_labels_csv(const std::filesystem::path& labels_csv) {
  std::ifstream in(labels_csv);
  if (!in) throw Error("cannot open labels file " + labels_csv.string());
  std::vector<LabelRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 2) {
      throw Error(labels_csv.string() + " row " + std::to_string(line_no) +
                  ": expected 2 fields (id,label), got " + std::to_string(fields.size()));
    }
    if (first) {
      first = false;
      if (!is_number(fields[1])) continue;
    }
    if (fields[1] != "0" && fields[1] != "1") {
      throw Error(labels_csv.string() + " row " + std::to_string(line_no) + " (id '" +
                  fields[0] + "'): label '" + fields[1] + "' is not 0 or 1");
    }
    if (fields[0].empty())
      throw Error(labels_csv.string() + " row " + std::to_string(line_no) + ": empty id");
    rows.push_back({fields[0], static_cast<std::uint8_t>(fields[1] == "1")});
  }
  if (rows.empty()) throw Error(labels_csv.string() + ": no samples");
  return rows;
}

LabeledImageSet load_labeled_images(const std::filesystem::path& image_dir,
                                    const std::filesystem::path& labels_csv) {
  const auto rows = read_labels_csv(labels_csv);
  LabeledImageSet set;
  set.ids.reserve(rows.size());
  set.images.reserve(rows.size());
  for (const auto& row : rows) {
    const auto path = image_dir / (row.id + ".png");
    if (!std::filesystem::exists(path))
      throw Error("image for id '" + row.id + "' not found at " + path.string());
    RgbImage img;
    try {
      img = read_png(path);
    } catch (const Error& e) {
      throw Error("id '" + row.id + "': " + e.what());
    }
    if (set.images.empty()) {
      set.height = img.height;
      set.width = img.width;
    } else if (img.height != set.height || img.width != set.width) {
      throw Error("id '" + row.id + "': image is " + std::to_string(img.height) + "x" +
                  std::to_string(img.width) + ", expected " + std::to_string(set.height) + "x" +
                  std::to_string(set.width));
    }
    set.ids.push_back(row.id);
    set.images.push_back(std::move(img));
    set.labels.push_back(row.label);
  }
  return set;
}

Matrix flatten(const LabeledImageSet& set) {
  if (set.size() == 0) throw Error("flatten: empty image set");
  const std::size_t d = set.height * set.width * 3;
  Matrix x(set.size(), d);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& px = set.images[i].pixels;
    if (px.size() != d) throw Error("flatten: image '" + set.ids[i] + "' has wrong pixel count");
    std::transform(px.begin(), px.end(), x.row(i).begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
  }
  return x;
}

RgbImage unflatten_row(std::span<const double> row, std::size_t height, std::size_t width) {
  if (row.size() != height * width * 3)
    throw Error("unflatten: row has " + std::to_string(row.size()) + " values, expected " +
                std::to_string(height * width * 3));
  RgbImage img{height, width, std::vector<std::uint8_t>(row.size())};
  std::transform(row.begin(), row.end(), img.pixels.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  });
  return img;
}

Dataset subsample(const Matrix& x, const Labels& y, std::size_t size, Rng& rng) {
  if (x.rows() != y.size()) throw Error("subsample: feature and label counts differ");
  if (size < 1 || size > x.rows()) {
    throw Error("subsample: size " + std::to_string(size) + " outside [1, " +
                std::to_string(x.rows()) + "]");
  }
  auto perm = shuffled_indices(x.rows(), rng);
  perm.resize(size);
  Dataset out{x.select_rows(perm), {}};
  out.y.reserve(size);
  for (auto r : perm) out.y.push_back(y[r]);
  return out;
}

Dataset synth_two_cluster(std::size_t n, std::size_t d, double separation, double noise, Rng& rng) {
  if (n < 2) throw Error("synth_two_cluster: need n >= 2");
  if (d < 1) throw Error("synth_two_cluster: need d >= 1");
  if (!(noise > 0.0) || !std::isfinite(noise)) throw Error("synth_two_cluster: noise must be > 0");
  if (!std::isfinite(separation)) throw Error("synth_two_cluster: separation must be finite");
  const std::size_t n_pos = (n + 1) / 2;
  Dataset out{Matrix(n, d), Labels(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i < n_pos;
    out.y[i] = positive ? 1 : 0;
    const double center = (positive ? 0.5 : -0.5) * separation;
    for (std::size_t j = 0; j < d; ++j) out.x(i, j) = center + noise * rng.next_gaussian();
  }
  return out;
}

LabeledImageSet synth_two_cluster_images(std::size_t n, std::size_t height, std::size_t width,
                                         double separation, double noise, Rng& rng) {
  if (height < 1 || width < 1) throw Error("synth_two_cluster_images: empty image size");
  const auto data = synth_two_cluster(n, height * width * 3, separation, noise, rng);
  LabeledImageSet set;
  set.height = height;
  set.width = width;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = data.x.row(i);
    std::vector<double> shifted(row.begin(), row.end());
    for (auto& v : shifted) v += 128.0;
    char id[32];
    std::snprintf(id, sizeof id, "s%05zu", i);
    set.ids.emplace_back(id);
    set.images.push_back(unflatten_row(shifted, height, width));
    set.labels.push_back(data.y[i]);
  }
  return set;
}

void write_labeled_images(const std::filesystem::path& dir, const LabeledImageSet& set) {
  std::filesystem::create_directories(dir);
  std::ofstream labels(dir / "labels.csv", std::ios::binary);
  if (!labels) throw Error("cannot write " + (dir / "labels.csv").string());
  labels << "id,label\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    write_png(dir / (set.ids[i] + ".png"), set.images[i]);
    labels << set.ids[i] << ',' << static_cast<int>(set.labels[i]) << '\n';
  }
}

void write_features_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "label";
  for (std::size_t j = 0; j < data.x.cols(); ++j) out << ",f" << j;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.x.rows(); ++i) {
    out << static_cast<int>(data.y[i]);
    for (double v : data.x.row(i)) out << ',' << v;
    out << '\n';
  }
}

Dataset read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open features file " + path.string());
  std::string line;
  std::vector<double> values;
  Labels labels;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (line_no == 1 && !fields.empty() && !is_number(fields[0])) continue;
    if (fields.size() < 2)
      throw Error(path.string() + " row " + std::to_string(line_no) + ": no feature columns");
    if (cols == 0) cols = fields.size() - 1;
    if (fields.size() - 1 != cols)
      throw Error(path.string() + " row " + std::to_string(line_no) + ": inconsistent width");
    if (fields[0] != "0" && fields[0] != "1")
      throw Error(path.string() + " row " + std::to_string(line_no) + ": label '" + fields[0] +
                  "' is not 0 or 1");
    labels.push_back(fields[0] == "1");
    const auto ctx = path.string() + " row " + std::to_string(line_no);
    for (std::size_t j = 1; j < fields.size(); ++j) values.push_back(parse_double(fields[j], ctx));
  }
  if (labels.empty()) throw Error(path.string() + ": no samples");
  return {Matrix(labels.size(), cols, std::move(values)), std::move(labels)};
}

}  // namespace metapipe
