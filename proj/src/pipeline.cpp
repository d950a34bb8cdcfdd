#include "metapipe/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "metapipe/dataset.hpp"
#include "metapipe/textio.hpp"

namespace metapipe {
namespace {

// Stage tags for seed derivation; each stage draws from its own stream.
enum StageTag : std::uint64_t {
  kTagSynthetic = 1,
  kTagSubsample = 2,
  kTagSplit = 3,
  kTagGaHoldout = 4,
  kTagGa = 5,
  kTagLogReg = 6,
};

template <typename F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error(std::string("stage '") + name + "': " + e.what());
  }
}

void check_components(const PipelineConfig& cfg, std::size_t features) {
  if (cfg.pca_components < 1 || cfg.pca_components > features) {
    throw Error("pca components " + std::to_string(cfg.pca_components) + " outside [1, " +
                std::to_string(features) + "] available features");
  }
}

std::vector<std::string> accuracy_cells(const PipelineReport& r) {
  std::vector<std::string> cells;
  for (auto kind : kAllClassifiers) {
    auto acc = r.test_accuracy(kind);
    cells.push_back(acc ? textio::fixed6(*acc) : std::string());
  }
  return cells;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

PipelineConfig all_classifiers(PipelineConfig cfg) {
  cfg.classifiers.assign(std::begin(kAllClassifiers), std::end(kAllClassifiers));
  return cfg;
}

}  // namespace

LoadedData load_data(const PipelineConfig& cfg) {
  LoadedData out;
  switch (cfg.source) {
    case DataSource::kSynthetic: {
      Rng rng(derive_seed(cfg.seed, kTagSynthetic));
      const auto& s = cfg.synth;
      if (s.image_height > 0 || s.image_width > 0) {
        auto set = synth_two_cluster_images(s.n, s.image_height, s.image_width, s.separation,
                                            s.noise, rng);
        out.x = flatten(set);
        out.y = set.labels;
        out.image_height = set.height;
        out.image_width = set.width;
      } else {
        auto d = synth_two_cluster(s.n, s.d, s.separation, s.noise, rng);
        out.x = std::move(d.x);
        out.y = std::move(d.y);
      }
      break;
    }
    case DataSource::kImages: {
      if (cfg.image_dir.empty() || cfg.labels_csv.empty())
        throw Error("image data source needs data.image_dir and data.labels_csv");
      auto set = load_labeled_images(cfg.image_dir, cfg.labels_csv);
      out.x = flatten(set);
      out.y = set.labels;
      out.image_height = set.height;
      out.image_width = set.width;
      break;
    }
    case DataSource::kFeaturesCsv: {
      if (cfg.features_csv.empty()) throw Error("features data source needs data.features_csv");
      auto d = read_features_csv(cfg.features_csv);
      out.x = std::move(d.x);
      out.y = std::move(d.y);
      break;
    }
  }
  return out;
}

LogRegModel fit_logreg_scaled(const Matrix& x, const Labels& y, const LogRegParams& params) {
  const auto scale = standardize_fit(x);
  auto model = logreg_fit(standardize_apply(x, scale), y, params);
  auto& w = model.weights;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double s = scale.stds[j];
    if (s > 0.0) {
      w[j + 1] /= s;
      w[0] -= w[j + 1] * scale.means[j];
    } else {
      w[j + 1] = 0.0;
    }
  }
  return model;
}

PreparedFeatures prepare_features(const PipelineConfig& cfg, const LoadedData& data) {
  if (data.x.rows() != data.y.size()) throw Error("features and labels differ in length");
  check_components(cfg, data.x.cols());

  PreparedFeatures out;
  const std::size_t size = cfg.dataset_size == 0 ? data.x.rows() : cfg.dataset_size;
  const auto picked = stage("subsample", [&] {
    if (size > data.x.rows()) {
      throw Error("dataset size " + std::to_string(size) + " exceeds the " +
                  std::to_string(data.x.rows()) + " available samples");
    }
    Rng rng(derive_seed(cfg.seed, kTagSubsample));
    auto perm = shuffled_indices(data.x.rows(), rng);
    perm.resize(size);
    return perm;
  });
  Dataset sample{data.x.select_rows(picked), {}};
  for (auto r : picked) sample.y.push_back(data.y[r]);
  out.n_samples = sample.x.rows();
  Split split = stage("split", [&] {
    Rng rng(derive_seed(cfg.seed, kTagSplit));
    return train_test_split(sample.x, sample.y, cfg.test_fraction, rng);
  });

  for (auto r : split.train_rows) out.train_source_rows.push_back(picked[r]);
  for (auto r : split.test_rows) out.test_source_rows.push_back(picked[r]);

  stage("pca", [&] {
    out.pca = pca_fit(split.train_x, cfg.pca_components);
    split.train_x = pca_transform(out.pca, split.train_x);
    split.test_x = pca_transform(out.pca, split.test_x);
    return 0;
  });

  const std::size_t k = cfg.pca_components;
  if (cfg.ga_enabled) {
    stage("ga", [&] {
      Rng rng(derive_seed(cfg.seed, kTagGaHoldout));
      const Split inner =
          train_test_split(split.train_x, split.train_y, cfg.ga_fitness_holdout, rng);
      LogRegParams lp = cfg.logreg;
      lp.seed = derive_seed(cfg.seed, kTagLogReg);
      const FitnessFunction fitness = [&](const Chromosome& c) {
        const auto model = fit_logreg_scaled(apply_mask(inner.train_x, c), inner.train_y, lp);
        return accuracy(logreg_predict(model, apply_mask(inner.test_x, c)), inner.test_y);
      };
      GaConfig ga = cfg.ga;
      ga.seed = derive_seed(cfg.ga_seed.value_or(cfg.seed), kTagGa);
      auto result = evolve(ga, k, fitness);
      out.mask = result.best;
      out.ga_history = std::move(result.history);
      return 0;
    });
  } else {
    out.mask = cfg.forced_mask.value_or(Chromosome::all_ones(k));
    if (out.mask.size() != k) {
      throw Error("forced mask has " + std::to_string(out.mask.size()) + " genes, expected " +
                  std::to_string(k));
    }
  }
  split.train_x = apply_mask(split.train_x, out.mask);
  split.test_x = apply_mask(split.test_x, out.mask);
  out.split = std::move(split);
  return out;
}

std::optional<double> PipelineReport::test_accuracy(ClassifierKind kind) const {
  for (const auto& r : results)
    if (r.kind == kind) return r.test_accuracy;
  return std::nullopt;
}

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  const LoadedData data = stage("load", [&] { return load_data(cfg); });
  return run_pipeline(cfg, data);
}

PipelineReport run_pipeline(const PipelineConfig& cfg, const LoadedData& data) {
  auto prepared = prepare_features(cfg, data);
  const auto& s = prepared.split;

  PipelineReport report;
  report.config_text = config_to_text(cfg, false);
  report.n_samples = prepared.n_samples;
  report.n_train = s.train_x.rows();
  report.n_test = s.test_x.rows();
  report.n_features = data.x.cols();
  report.n_components = prepared.pca.component_count();
  report.explained_variance = prepared.pca.total_variance > 0.0
                                  ? explained_variance_ratio(prepared.pca)
                                  : std::vector<double>(report.n_components, 0.0);
  report.ga_enabled = cfg.ga_enabled;
  report.mask = prepared.mask;
  report.ga_history = prepared.ga_history;
  report.pca = prepared.pca;

  for (auto kind : cfg.classifiers) {
    ClassifierResult r{kind};
    const auto start = std::chrono::steady_clock::now();
    Labels train_pred, test_pred;
    stage(("train " + to_string(kind)).c_str(), [&] {
      switch (kind) {
        case ClassifierKind::kKnn: {
          const std::size_t k = cfg.knn_k == 0 ? knn_suggest_k(s.train_x.rows()) : cfg.knn_k;
          report.knn = knn_fit(s.train_x, s.train_y, k);
          train_pred = knn_predict(*report.knn, s.train_x);
          test_pred = knn_predict(*report.knn, s.test_x);
          break;
        }
        case ClassifierKind::kLogReg: {
          LogRegParams lp = cfg.logreg;
          lp.seed = derive_seed(cfg.seed, kTagLogReg);
          report.logreg = fit_logreg_scaled(s.train_x, s.train_y, lp);
          train_pred = logreg_predict(*report.logreg, s.train_x);
          test_pred = logreg_predict(*report.logreg, s.test_x);
          break;
        }
        case ClassifierKind::kTree:
          report.tree = tree_fit(s.train_x, s.train_y, cfg.tree);
          train_pred = tree_predict(*report.tree, s.train_x);
          test_pred = tree_predict(*report.tree, s.test_x);
          break;
      }
      return 0;
    });
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.train_accuracy = accuracy(train_pred, s.train_y);
    r.test_accuracy = accuracy(test_pred, s.test_y);
    report.results.push_back(r);
  }
  return report;
}

std::string format_report(const PipelineReport& report) {
  using textio::fixed6;
  std::ostringstream out;
  out << "metapipe report\n";
  out << "version " << kVersion << "\n\n";
  out << "== config ==\n" << report.config_text << '\n';
  out << "== data ==\n";
  out << "samples " << report.n_samples << '\n';
  out << "train " << report.n_train << '\n';
  out << "test " << report.n_test << '\n';
  out << "features " << report.n_features << "\n\n";
  out << "== pca ==\n";
  out << "components " << report.n_components << '\n';
  out << "explained_variance_ratio";
  for (double v : report.explained_variance) out << ' ' << fixed6(v);
  out << '\n';
  out << "cumulative_explained_variance "
      << fixed6(std::accumulate(report.explained_variance.begin(), report.explained_variance.end(),
                                0.0))
      << "\n\n";
  out << "== feature selection ==\n";
  out << "ga " << (report.ga_enabled ? "enabled" : "disabled") << '\n';
  out << "generations_run " << report.ga_history.size() << '\n';
  if (!report.ga_history.empty())
    out << "best_fitness " << fixed6(report.ga_history.back().best_fitness) << '\n';
  out << "selected " << report.mask.popcount() << " of " << report.mask.size() << '\n';
  out << "chromosome " << report.mask.hex() << "\n\n";
  out << "== results ==\n";
  for (const auto& r : report.results) {
    out << to_string(r.kind) << " train_acc " << fixed6(r.train_accuracy) << " test_acc "
        << fixed6(r.test_accuracy) << '\n';
  }
  return out.str();
}

std::string format_report_csv(const PipelineReport& report) {
  std::string out = "classifier,train_acc,test_acc\n";
  for (const auto& r : report.results) {
    out += to_string(r.kind) + ',' + textio::fixed6(r.train_accuracy) + ',' +
           textio::fixed6(r.test_accuracy) + '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_run_outputs(const PipelineConfig& cfg, const PipelineReport& report) {
  const auto& dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.txt", format_report(report));
  write_text_file(dir / "report.csv", format_report_csv(report));
  std::string timing = "classifier,seconds\n";
  for (const auto& r : report.results) timing += to_string(r.kind) + ',' + textio::fixed6(r.seconds) + '\n';
  write_text_file(dir / "timing.csv", timing);
  if (report.ga_enabled) write_history_csv(dir / "ga_history.csv", report.ga_history);
  save_pca_model(dir / "model_pca.txt", report.pca);
  if (report.knn) save_knn_model(dir / "model_knn.txt", *report.knn);
  if (report.logreg) save_logreg_model(dir / "model_logreg.txt", *report.logreg);
  if (report.tree) save_tree_model(dir / "model_tree.txt", *report.tree);
}

std::string CsvTable::to_csv() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

CsvTable sweep_components(const PipelineConfig& cfg, const std::vector<std::size_t>& values) {
  CsvTable table{{"components", "knn_acc", "logreg_acc", "tree_acc"}, {}, {}};
  const auto data = stage("load", [&] { return load_data(cfg); });
  for (auto v : values) {
    auto run_cfg = all_classifiers(cfg);
    run_cfg.pca_components = v;
    std::vector<std::string> row{std::to_string(v)};
    try {
      auto cells = accuracy_cells(run_pipeline(run_cfg, data));
      row.insert(row.end(), cells.begin(), cells.end());
    } catch (const std::exception& e) {
      row.resize(4);
      table.errors.push_back("components=" + std::to_string(v) + ": " + e.what());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable sweep_dataset_size(const PipelineConfig& cfg, const std::vector<std::size_t>& sizes) {
  CsvTable table{{"size", "knn_acc", "logreg_acc", "tree_acc"}, {}, {}};
  const auto data = stage("load", [&] { return load_data(cfg); });
  for (auto n : sizes) {
    auto run_cfg = all_classifiers(cfg);
    run_cfg.dataset_size = n;
    std::vector<std::string> row{std::to_string(n)};
    try {
      if (n == 0 || n > data.x.rows()) {
        throw Error("size outside [1, " + std::to_string(data.x.rows()) + "]");
      }
      auto cells = accuracy_cells(run_pipeline(run_cfg, data));
      row.insert(row.end(), cells.begin(), cells.end());
    } catch (const std::exception& e) {
      row.resize(4);
      table.errors.push_back("size=" + std::to_string(n) + ": " + e.what());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable sweep_k(const PipelineConfig& cfg, const std::vector<std::size_t>& ks,
                 bool cap_at_train_size) {
  CsvTable table{{"k", "knn_acc"}, {}, {}};
  const auto data = stage("load", [&] { return load_data(cfg); });
  const auto prepared = prepare_features(cfg, data);
  const auto& s = prepared.split;
  for (auto k : ks) {
    if (cap_at_train_size && k > s.train_x.rows()) continue;
    std::vector<std::string> row{std::to_string(k)};
    try {
      const auto model = knn_fit(s.train_x, s.train_y, k);
      row.push_back(textio::fixed6(accuracy(knn_predict(model, s.test_x), s.test_y)));
    } catch (const std::exception& e) {
      row.resize(2);
      table.errors.push_back("k=" + std::to_string(k) + ": " + e.what());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable sweep_ga(const PipelineConfig& cfg, const std::vector<std::size_t>& populations,
                  const std::vector<std::size_t>& generations) {
  CsvTable table{{"pop", "generations", "knn_acc", "logreg_acc", "tree_acc"}, {}, {}};
  const auto data = stage("load", [&] { return load_data(cfg); });
  for (auto pop : populations) {
    for (auto gens : generations) {
      auto run_cfg = all_classifiers(cfg);
      run_cfg.ga_enabled = true;
      run_cfg.ga.population_size = pop;
      run_cfg.ga.max_generations = gens;
      std::vector<std::string> row{std::to_string(pop), std::to_string(gens)};
      try {
        auto cells = accuracy_cells(run_pipeline(run_cfg, data));
        row.insert(row.end(), cells.begin(), cells.end());
      } catch (const std::exception& e) {
        row.resize(5);
        table.errors.push_back("pop=" + std::to_string(pop) + " generations=" +
                               std::to_string(gens) + ": " + e.what());
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

CsvTable ablate_ga(const PipelineConfig& cfg, std::size_t repeats) {
  if (repeats < 1) throw Error("ablate_ga: repeats must be at least 1");
  CsvTable table{{"repeat", "ga_enabled", "knn_acc", "logreg_acc", "tree_acc"}, {}, {}};
  const auto data = stage("load", [&] { return load_data(cfg); });
  for (std::size_t r = 0; r < repeats; ++r) {
    for (bool ga : {true, false}) {
      auto run_cfg = all_classifiers(cfg);
      run_cfg.ga_enabled = ga;
      run_cfg.ga_seed = cfg.ga_seed.value_or(cfg.seed) + r;
      run_cfg.forced_mask.reset();
      std::vector<std::string> row{std::to_string(r), ga ? "1" : "0"};
      try {
        auto cells = accuracy_cells(run_pipeline(run_cfg, data));
        row.insert(row.end(), cells.begin(), cells.end());
      } catch (const std::exception& e) {
        row.resize(5);
        table.errors.push_back("repeat=" + std::to_string(r) + " ga=" + (ga ? "1" : "0") + ": " +
                               e.what());
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::vector<std::size_t> doubling_interval(std::size_t lo, std::size_t hi) {
  if (lo < 1 || hi < lo) throw Error("doubling_interval: need 1 <= lo <= hi");
  std::vector<std::size_t> out;
  for (std::size_t v = lo; v <= hi; v *= 2) out.push_back(v);
  if (out.back() != hi) out.push_back(hi);
  return out;
}

std::vector<std::filesystem::path> export_components(const PipelineConfig& cfg, std::size_t count,
                                                     const std::filesystem::path& out_dir) {
  const auto data = stage("load", [&] { return load_data(cfg); });
  if (data.image_height == 0 || data.image_width == 0) {
    throw Error(
        "component export needs image-shaped features (H x W x 3); this data source has " +
        std::to_string(data.x.cols()) + " plain features");
  }
  if (count > cfg.pca_components) {
    throw Error("cannot export " + std::to_string(count) + " components from a " +
                std::to_string(cfg.pca_components) + "-component model");
  }
  std::vector<std::filesystem::path> written;
  if (count == 0) return written;
  auto no_ga = cfg;
  no_ga.ga_enabled = false;
  no_ga.forced_mask.reset();
  const auto prepared = prepare_features(no_ga, data);
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < count; ++i) {
    auto path = out_dir / ("component_" + std::to_string(i) + ".png");
    write_png(path, component_to_image(prepared.pca, i, data.image_height, data.image_width));
    written.push_back(std::move(path));
  }
  return written;
}

std::filesystem::path write_synthetic_dataset(const PipelineConfig& cfg,
                                              const std::filesystem::path& dir) {
  const auto& s = cfg.synth;
  Rng rng(derive_seed(cfg.seed, kTagSynthetic));
  std::filesystem::create_directories(dir);
  if (s.image_height > 0 || s.image_width > 0) {
    const auto set =
        synth_two_cluster_images(s.n, s.image_height, s.image_width, s.separation, s.noise, rng);
    write_labeled_images(dir, set);
    return dir / "labels.csv";
  }
  const auto d = synth_two_cluster(s.n, s.d, s.separation, s.noise, rng);
  write_features_csv(dir / "features.csv", d);
  return dir / "features.csv";
}

}  // namespace metapipe
