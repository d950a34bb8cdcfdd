#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "metapipe/pipeline.hpp"
#include "metapipe/textio.hpp"

namespace metapipe {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string where(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

std::uint64_t parse_u64(const std::string& v, const std::string& name) {
  std::uint64_t out;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end)
    throw Error(name + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t parse_count(const std::string& v, const std::string& name) {
  return static_cast<std::size_t>(parse_u64(v, name));
}

double parse_real(const std::string& v, const std::string& name) {
  double out;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out))
    throw Error(name + ": expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, const std::string& name) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw Error(name + ": expected true or false, got '" + v + "'");
}

ClassifierKind parse_classifier(const std::string& v) {
  if (v == "knn") return ClassifierKind::kKnn;
  if (v == "logreg") return ClassifierKind::kLogReg;
  if (v == "tree") return ClassifierKind::kTree;
  throw Error("unknown classifier '" + v + "' (expected knn, logreg, tree or all)");
}

std::string source_name(DataSource s) {
  switch (s) {
    case DataSource::kSynthetic: return "synthetic";
    case DataSource::kImages: return "images";
    case DataSource::kFeaturesCsv: return "features";
  }
  return "synthetic";
}

}  // namespace

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kKnn: return "knn";
    case ClassifierKind::kLogReg: return "logreg";
    case ClassifierKind::kTree: return "tree";
  }
  return "knn";
}

PipelineConfig preset_config(const std::string& name) {
  PipelineConfig cfg;
  if (name == "synthetic") return cfg;
  if (name == "paper-2022") {
    cfg.preset = name;
    cfg.source = DataSource::kImages;
    cfg.dataset_size = 6250;
    cfg.pca_components = 250;
    cfg.ga_enabled = true;
    cfg.ga.population_size = 29;
    cfg.ga.max_generations = 29;
    cfg.knn_k = 160;
    cfg.logreg.solver = LogRegSolver::kSag;
    return cfg;
  }
  throw Error("unknown preset '" + name + "' (expected synthetic or paper-2022)");
}

void apply_setting(PipelineConfig& cfg, const std::string& section, const std::string& key,
                   const std::string& value) {
  const std::string name = where(section, key);
  if (section.empty()) {
    if (key == "preset") {
      cfg = preset_config(value);
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, name);
    } else {
      throw Error("unknown setting '" + name + "'");
    }
  } else if (section == "data") {
    if (key == "source") {
      if (value == "synthetic") cfg.source = DataSource::kSynthetic;
      else if (value == "images") cfg.source = DataSource::kImages;
      else if (value == "features") cfg.source = DataSource::kFeaturesCsv;
      else throw Error(name + ": expected synthetic, images or features");
    } else if (key == "image_dir") {
      cfg.image_dir = value;
    } else if (key == "labels_csv") {
      cfg.labels_csv = value;
    } else if (key == "features_csv") {
      cfg.features_csv = value;
    } else if (key == "synth_n") {
      cfg.synth.n = parse_count(value, name);
    } else if (key == "synth_d") {
      cfg.synth.d = parse_count(value, name);
    } else if (key == "synth_separation") {
      cfg.synth.separation = parse_real(value, name);
    } else if (key == "synth_noise") {
      cfg.synth.noise = parse_real(value, name);
    } else if (key == "synth_image_height") {
      cfg.synth.image_height = parse_count(value, name);
    } else if (key == "synth_image_width") {
      cfg.synth.image_width = parse_count(value, name);
    } else if (key == "dataset_size") {
      cfg.dataset_size = parse_count(value, name);
    } else if (key == "test_fraction") {
      cfg.test_fraction = parse_real(value, name);
    } else {
      throw Error("unknown setting '" + name + "'");
    }
  } else if (section == "pca") {
    if (key == "components") cfg.pca_components = parse_count(value, name);
    else throw Error("unknown setting '" + name + "'");
  } else if (section == "ga") {
    if (key == "enabled") cfg.ga_enabled = parse_bool(value, name);
    else if (key == "population") cfg.ga.population_size = parse_count(value, name);
    else if (key == "generations") cfg.ga.max_generations = parse_count(value, name);
    else if (key == "gene_one_prob") cfg.ga.gene_one_prob = parse_real(value, name);
    else if (key == "mutation_prob") cfg.ga.mutation_prob = parse_real(value, name);
    else if (key == "elite_count") cfg.ga.elite_count = parse_count(value, name);
    else if (key == "seed") cfg.ga_seed = parse_u64(value, name);
    else if (key == "fitness_holdout") cfg.ga_fitness_holdout = parse_real(value, name);
    else if (key == "mask") cfg.forced_mask = Chromosome::from_string(value);
    else throw Error("unknown setting '" + name + "'");
  } else if (section == "classifier") {
    if (key == "kind") {
      cfg.classifiers.clear();
      if (value == "all") {
        cfg.classifiers.assign(std::begin(kAllClassifiers), std::end(kAllClassifiers));
      } else {
        std::istringstream in(value);
        for (std::string part; std::getline(in, part, ',');)
          cfg.classifiers.push_back(parse_classifier(trim(part)));
      }
      if (cfg.classifiers.empty()) throw Error(name + ": no classifier given");
    } else if (key == "knn_k") {
      cfg.knn_k = parse_count(value, name);
    } else if (key == "logreg_solver") {
      cfg.logreg.solver = parse_solver(value);
    } else if (key == "logreg_learning_rate") {
      cfg.logreg.learning_rate = parse_real(value, name);
    } else if (key == "logreg_max_iter") {
      cfg.logreg.max_iter = parse_count(value, name);
    } else if (key == "logreg_tolerance") {
      cfg.logreg.tolerance = parse_real(value, name);
    } else if (key == "logreg_l2") {
      cfg.logreg.l2_strength = parse_real(value, name);
    } else if (key == "tree_max_depth") {
      cfg.tree.max_depth =
          value == "unlimited" ? TreeParams::kUnlimitedDepth : parse_count(value, name);
    } else if (key == "tree_min_samples_split") {
      cfg.tree.min_samples_split = parse_count(value, name);
    } else if (key == "tree_impurity") {
      cfg.tree.impurity = parse_impurity(value);
    } else {
      throw Error("unknown setting '" + name + "'");
    }
  } else if (section == "output") {
    if (key == "dir") cfg.output_dir = value;
    else throw Error("unknown setting '" + name + "'");
  } else {
    throw Error("unknown config section [" + section + "]");
  }
}

void apply_config_text(PipelineConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(at + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(at + "expected 'key = value'");
    try {
      apply_setting(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(at + e.what());
    }
  }
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  PipelineConfig cfg;
  apply_config_text(cfg, text.str(), path.string());
  return cfg;
}

std::string config_to_text(const PipelineConfig& cfg, bool include_output) {
  const auto num = textio::shortest;
  std::ostringstream out;
  out << "preset = " << cfg.preset << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "\n[data]\n";
  out << "source = " << source_name(cfg.source) << '\n';
  if (cfg.source == DataSource::kImages) {
    out << "image_dir = " << cfg.image_dir.string() << '\n';
    out << "labels_csv = " << cfg.labels_csv.string() << '\n';
  } else if (cfg.source == DataSource::kFeaturesCsv) {
    out << "features_csv = " << cfg.features_csv.string() << '\n';
  } else {
    out << "synth_n = " << cfg.synth.n << '\n';
    out << "synth_d = " << cfg.synth.d << '\n';
    out << "synth_separation = " << num(cfg.synth.separation) << '\n';
    out << "synth_noise = " << num(cfg.synth.noise) << '\n';
    out << "synth_image_height = " << cfg.synth.image_height << '\n';
    out << "synth_image_width = " << cfg.synth.image_width << '\n';
  }
  out << "dataset_size = " << cfg.dataset_size << '\n';
  out << "test_fraction = " << num(cfg.test_fraction) << '\n';
  out << "\n[pca]\n";
  out << "components = " << cfg.pca_components << '\n';
  out << "\n[ga]\n";
  out << "enabled = " << (cfg.ga_enabled ? "true" : "false") << '\n';
  out << "population = " << cfg.ga.population_size << '\n';
  out << "generations = " << cfg.ga.max_generations << '\n';
  out << "gene_one_prob = " << num(cfg.ga.gene_one_prob) << '\n';
  out << "mutation_prob = " << num(cfg.ga.mutation_prob) << '\n';
  out << "elite_count = " << cfg.ga.elite_count << '\n';
  if (cfg.ga_seed) out << "seed = " << *cfg.ga_seed << '\n';
  out << "fitness_holdout = " << num(cfg.ga_fitness_holdout) << '\n';
  if (cfg.forced_mask) {
    out << "mask = ";
    for (auto g : cfg.forced_mask->genes) out << static_cast<int>(g);
    out << '\n';
  }
  out << "\n[classifier]\n";
  out << "kind = ";
  for (std::size_t i = 0; i < cfg.classifiers.size(); ++i)
    out << (i ? "," : "") << to_string(cfg.classifiers[i]);
  out << '\n';
  out << "knn_k = " << cfg.knn_k << '\n';
  out << "logreg_solver = " << to_string(cfg.logreg.solver) << '\n';
  out << "logreg_learning_rate = " << num(cfg.logreg.learning_rate) << '\n';
  out << "logreg_max_iter = " << cfg.logreg.max_iter << '\n';
  out << "logreg_tolerance = " << num(cfg.logreg.tolerance) << '\n';
  out << "logreg_l2 = " << num(cfg.logreg.l2_strength) << '\n';
  out << "tree_max_depth = "
      << (cfg.tree.max_depth == TreeParams::kUnlimitedDepth ? std::string("unlimited")
                                                            : std::to_string(cfg.tree.max_depth))
      << '\n';
  out << "tree_min_samples_split = " << cfg.tree.min_samples_split << '\n';
  out << "tree_impurity = " << to_string(cfg.tree.impurity) << '\n';
  if (include_output) {
    out << "\n[output]\n";
    out << "dir = " << cfg.output_dir.string() << '\n';
  }
  return out.str();
}

}  // namespace metapipe
