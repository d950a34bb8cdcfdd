#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "metapipe/core.hpp"
#include "metapipe/image.hpp"

namespace metapipe {

/// Labelled images sharing one height and width.
struct LabeledImageSet {
  std::vector<std::string> ids;
  std::vector<RgbImage> images;
  Labels labels;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return ids.size(); }
};

struct LabelRow {
  std::string id;
  std::uint8_t label;
};

/// Parses `id,label` rows. A first row whose second field is not numeric is
/// treated as a header.
std::vector<LabelRow> read_labels_csv(const std::filesystem::path& labels_csv);

/// Loads `<id>.png` from `image_dir` for every row of the labels CSV, in CSV order.
LabeledImageSet load_labeled_images(const std::filesystem::path& image_dir,
                                    const std::filesystem::path& labels_csv);

/// One row per image: pixels row-major, left to right, channels R,G,B.
Matrix flatten(const LabeledImageSet& set);

/// Inverse of flatten for one row. Values are rounded and clamped to [0, 255].
RgbImage unflatten_row(std::span<const double> row, std::size_t height, std::size_t width);

struct Dataset {
  Matrix x;
  Labels y;
};

/// Uniform subset of `size` rows without replacement, in shuffled order.
Dataset subsample(const Matrix& x, const Labels& y, std::size_t size, Rng& rng);

/// Two Gaussian clusters centred at +separation/2 (label 1, first ceil(n/2)
/// rows) and -separation/2 (label 0) on every axis.
Dataset synth_two_cluster(std::size_t n, std::size_t d, double separation, double noise, Rng& rng);

/// Image-shaped variant of synth_two_cluster: every channel value is
/// 128 +/- separation/2 plus noise, rounded and clamped to a byte. Ids are `s00000`, ...
LabeledImageSet synth_two_cluster_images(std::size_t n, std::size_t height, std::size_t width,
                                         double separation, double noise, Rng& rng);

/// Writes `<id>.png` for every image and a `labels.csv` with an `id,label` header.
void write_labeled_images(const std::filesystem::path& dir, const LabeledImageSet& set);

/// Writes `label,f0,f1,...` rows with a header line.
void write_features_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_features_csv(const std::filesystem::path& path);

}  // namespace metapipe
