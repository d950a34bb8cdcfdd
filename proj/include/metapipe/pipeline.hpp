#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metapipe/classifiers.hpp"
#include "metapipe/core.hpp"
#include "metapipe/genetic.hpp"
#include "metapipe/pca.hpp"

namespace metapipe {

inline constexpr const char* kVersion = "1.0.0";

enum class DataSource { kSynthetic, kImages, kFeaturesCsv };
enum class ClassifierKind { kKnn, kLogReg, kTree };

inline constexpr ClassifierKind kAllClassifiers[] = {ClassifierKind::kKnn, ClassifierKind::kLogReg,
                                                     ClassifierKind::kTree};

std::string to_string(ClassifierKind kind);

struct SyntheticSpec {
  std::size_t n = 600;
  std::size_t d = 20;
  double separation = 6.0;
  double noise = 1.0;
  /// When both are set the data is generated as H x W RGB images and d is ignored.
  std::size_t image_height = 0;
  std::size_t image_width = 0;
};

struct PipelineConfig {
  std::string preset = "synthetic";
  std::uint64_t seed = 0;

  // [data]
  DataSource source = DataSource::kSynthetic;
  std::filesystem::path image_dir;
  std::filesystem::path labels_csv;
  std::filesystem::path features_csv;
  SyntheticSpec synth;
  /// Rows drawn before splitting; 0 keeps every row.
  std::size_t dataset_size = 0;
  double test_fraction = 0.2;

  // [pca]
  std::size_t pca_components = 5;

  // [ga]
  bool ga_enabled = true;
  GaConfig ga{10, 10, 0.5, 0.25, 2, 0};
  /// Overrides the master seed for the GA stage only.
  std::optional<std::uint64_t> ga_seed;
  double ga_fitness_holdout = 0.25;
  /// Used instead of the GA when the GA is disabled; empty keeps every component.
  std::optional<Chromosome> forced_mask;

  // [classifier]
  std::vector<ClassifierKind> classifiers{std::begin(kAllClassifiers), std::end(kAllClassifiers)};
  /// 0 picks round(sqrt(n_train)).
  std::size_t knn_k = 0;
  LogRegParams logreg;
  TreeParams tree;

  // [output]
  std::filesystem::path output_dir = "metapipe_out";
};

/// Named presets: `synthetic` (default) and `paper-2022`.
PipelineConfig preset_config(const std::string& name);

/// Applies one `key = value` setting from `section`. Throws on unknown keys
/// or malformed values.
void apply_setting(PipelineConfig& cfg, const std::string& section, const std::string& key,
                   const std::string& value);

/// Line-oriented `key = value` file with `[section]` headers and `#` comments.
/// A `preset` key before the first section resets to that preset first.
PipelineConfig load_config_file(const std::filesystem::path& path);
void apply_config_text(PipelineConfig& cfg, const std::string& text,
                       const std::string& origin = "config");

/// Canonical text form of the config, loadable by load_config_file. Reports
/// leave out the [output] section so the destination does not change their bytes.
std::string config_to_text(const PipelineConfig& cfg, bool include_output = true);

/// Data as loaded from its source, before subsampling and splitting.
struct LoadedData {
  Matrix x;
  Labels y;
  /// Non-zero when rows are flattened H x W RGB images.
  std::size_t image_height = 0;
  std::size_t image_width = 0;
};

LoadedData load_data(const PipelineConfig& cfg);

/// Train/test features after standardization, PCA and the selected mask.
struct PreparedFeatures {
  Split split;
  PcaModel pca;
  Chromosome mask;
  GaHistory ga_history;
  std::size_t n_samples = 0;
  // Rows of the loaded data that ended up in each side of the split.
  std::vector<std::size_t> train_source_rows;
  std::vector<std::size_t> test_source_rows;
};

/// Subsample, split, fit PCA on the training rows and run (or skip) the GA.
PreparedFeatures prepare_features(const PipelineConfig& cfg, const LoadedData& data);

/// Logistic regression on internally standardized inputs, with the scaling
/// folded back into the weights so the model applies to raw features.
LogRegModel fit_logreg_scaled(const Matrix& x, const Labels& y, const LogRegParams& params);

struct ClassifierResult {
  ClassifierKind kind;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double seconds = 0.0;
};

struct PipelineReport {
  std::string config_text;
  std::size_t n_samples = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_features = 0;
  std::size_t n_components = 0;
  std::vector<double> explained_variance;
  bool ga_enabled = false;
  Chromosome mask;
  GaHistory ga_history;
  std::vector<ClassifierResult> results;

  // Fitted artifacts, written out by write_run_outputs.
  PcaModel pca;
  std::optional<KnnModel> knn;
  std::optional<LogRegModel> logreg;
  std::optional<TreeModel> tree;

  std::optional<double> test_accuracy(ClassifierKind kind) const;
};

/// Runs every stage; errors are rethrown prefixed with the failing stage.
PipelineReport run_pipeline(const PipelineConfig& cfg);
PipelineReport run_pipeline(const PipelineConfig& cfg, const LoadedData& data);

/// Human-readable report. Contains no timings, so equal configs give equal bytes.
std::string format_report(const PipelineReport& report);
/// `classifier,train_acc,test_acc`
std::string format_report_csv(const PipelineReport& report);

/// Writes report.txt, report.csv, timing.csv, ga_history.csv (when the GA
/// ran) and the fitted models into cfg.output_dir.
void write_run_outputs(const PipelineConfig& cfg, const PipelineReport& report);

/// Sweep output: header plus rows; failed rows keep their key and leave the
/// accuracy cells empty, with the message collected in `errors`.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> errors;

  std::string to_csv() const;
};

CsvTable sweep_components(const PipelineConfig& cfg, const std::vector<std::size_t>& values);
CsvTable sweep_dataset_size(const PipelineConfig& cfg, const std::vector<std::size_t>& sizes);
/// With `cap_at_train_size`, values above the training-set size are dropped
/// instead of reported as row errors.
CsvTable sweep_k(const PipelineConfig& cfg, const std::vector<std::size_t>& ks,
                 bool cap_at_train_size = false);
CsvTable sweep_ga(const PipelineConfig& cfg, const std::vector<std::size_t>& populations,
                  const std::vector<std::size_t>& generations);
CsvTable ablate_ga(const PipelineConfig& cfg, std::size_t repeats);

/// 1, 2, 4, ... up to `hi`, with `hi` itself appended when it is not a power of two.
std::vector<std::size_t> doubling_interval(std::size_t lo, std::size_t hi);

/// Writes component_<i>.png for i in [0, count). Requires image-shaped data.
std::vector<std::filesystem::path> export_components(const PipelineConfig& cfg, std::size_t count,
                                                     const std::filesystem::path& out_dir);

/// Write the configured synthetic dataset to disk, exactly as load_data would
/// generate it: features.csv for plain data, or PNGs plus labels.csv when
/// image dimensions are set. Returns the file that describes the dataset.
std::filesystem::path write_synthetic_dataset(const PipelineConfig& cfg,
                                              const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace metapipe
