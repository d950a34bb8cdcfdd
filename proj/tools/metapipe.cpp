// metapipe command line: runs the pipeline, its sweeps and dataset helpers.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "metapipe/pipeline.hpp"
#include "metapipe/textio.hpp"

using namespace metapipe;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Config file (key = value with [sections])");
  cmd->add_option("--preset", o.preset, "Start from a named preset: synthetic or paper-2022");
  cmd->add_option("-s,--seed", o.seed, "Master seed");
  cmd->add_option("-o,--out", o.out, "Output directory");
  cmd->add_option("--set", o.sets, "Override settings, e.g. --set pca.components=8 ga.enabled=false");
}

PipelineConfig resolve_config(const CommonOptions& o) {
  PipelineConfig cfg = o.preset.empty() ? PipelineConfig{} : preset_config(o.preset);
  if (!o.config_path.empty()) {
    // File settings land on top of --preset; a preset line inside the file resets first.
    std::ifstream in(o.config_path);
    if (!in) throw Error("cannot open config file " + o.config_path);
    std::ostringstream text;
    text << in.rdbuf();
    apply_config_text(cfg, text.str(), o.config_path);
  }
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error("--set expects section.key=value, got '" + s + "'");
    const auto name = s.substr(0, eq);
    const auto dot = name.find('.');
    const auto section = dot == std::string::npos ? std::string() : name.substr(0, dot);
    const auto key = dot == std::string::npos ? name : name.substr(dot + 1);
    try {
      apply_setting(cfg, section, key, s.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(std::string("--set: ") + e.what());
    }
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

void emit_table(const PipelineConfig& cfg, const CsvTable& table, const std::string& name) {
  const auto csv = table.to_csv();
  write_text_file(cfg.output_dir / (name + ".csv"), csv);
  std::cout << csv;
  const auto err_path = cfg.output_dir / "sweep_errors.txt";
  std::filesystem::remove(err_path);
  if (!table.errors.empty()) {
    std::string text;
    for (const auto& e : table.errors) {
      std::cerr << "warning: " << e << '\n';
      text += e + '\n';
    }
    write_text_file(err_path, text);
  }
  std::cerr << "wrote " << (cfg.output_dir / (name + ".csv")).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metapipe: PCA, genetic feature selection and classical classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonOptions common;

  auto* run = app.add_subcommand("run", "Run the full pipeline and write the report");
  add_common(run, common);
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Do not print the report");

  auto* sweep_c = app.add_subcommand("sweep-components", "Accuracy per PCA component count");
  add_common(sweep_c, common);
  std::vector<std::size_t> values;
  std::vector<std::size_t> doubling;
  sweep_c->add_option("--values", values, "Component counts")->delimiter(',');
  sweep_c->add_option("--doubling", doubling, "LO,HI: powers of two from LO, plus HI")
      ->delimiter(',')
      ->expected(2);

  auto* sweep_s = app.add_subcommand("sweep-size", "Accuracy per dataset size");
  add_common(sweep_s, common);
  sweep_s->add_option("--sizes", values, "Dataset sizes")->delimiter(',');
  sweep_s->add_option("--doubling", doubling, "LO,HI: powers of two from LO, plus HI")
      ->delimiter(',')
      ->expected(2);

  auto* sweep_kc = app.add_subcommand("sweep-k", "k-NN accuracy per neighbour count");
  add_common(sweep_kc, common);
  bool no_cap = false;
  sweep_kc->add_option("--ks", values, "Neighbour counts (default 1..320 doubling)")
      ->delimiter(',');
  sweep_kc->add_option("--doubling", doubling, "LO,HI: powers of two from LO, plus HI")
      ->delimiter(',')
      ->expected(2);
  sweep_kc->add_flag("--no-cap", no_cap,
                     "Keep k above the training size (reported as row errors)");

  auto* sweep_g = app.add_subcommand("sweep-ga", "Accuracy over a population x generations grid");
  add_common(sweep_g, common);
  std::vector<std::size_t> pops{4, 8, 16, 29};
  std::vector<std::size_t> gens{4, 8, 16, 29};
  sweep_g->add_option("--pops", pops, "Population sizes")->delimiter(',')->capture_default_str();
  sweep_g->add_option("--generations", gens, "Generation counts")
      ->delimiter(',')
      ->capture_default_str();

  auto* ablate = app.add_subcommand("ablate-ga", "Accuracy with and without the GA");
  add_common(ablate, common);
  std::size_t repeats = 3;
  ablate->add_option("--repeats", repeats, "Repeats (seed + r each)")->capture_default_str();

  auto* export_c = app.add_subcommand("export-components", "Write PCA components as PNG images");
  add_common(export_c, common);
  std::size_t count = 8;
  export_c->add_option("-n,--count", count, "Number of components")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write a synthetic two-cluster dataset");
  add_common(synth, common);
  std::optional<std::size_t> n, d;
  std::optional<double> separation, noise;
  std::string image_shape;
  synth->add_option("-n,--samples", n, "Sample count");
  synth->add_option("-d,--dims", d, "Feature count (plain features only)");
  synth->add_option("--separation", separation, "Distance between the cluster means");
  synth->add_option("--noise", noise, "Per-feature noise standard deviation");
  synth->add_option("--images", image_shape, "Write HxW RGB PNGs plus labels.csv instead");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = resolve_config(common);
    auto pick = [&](std::vector<std::size_t> fallback) {
      if (!values.empty() && !doubling.empty())
        throw Error("give either an explicit list or --doubling, not both");
      if (!doubling.empty()) return doubling_interval(doubling[0], doubling[1]);
      if (!values.empty()) return values;
      if (fallback.empty()) throw Error("no sweep values given");
      return fallback;
    };

    if (run->parsed()) {
      const auto report = run_pipeline(cfg);
      write_run_outputs(cfg, report);
      if (!quiet) std::cout << format_report(report);
      for (const auto& r : report.results) {
        std::cerr << to_string(r.kind) << ": " << textio::fixed6(r.seconds) << " s\n";
      }
      std::cerr << "wrote " << cfg.output_dir.string() << '\n';
    } else if (sweep_c->parsed()) {
      emit_table(cfg, sweep_components(cfg, pick({})), "sweep_components");
    } else if (sweep_s->parsed()) {
      emit_table(cfg, sweep_dataset_size(cfg, pick({})), "sweep_size");
    } else if (sweep_kc->parsed()) {
      emit_table(cfg, sweep_k(cfg, pick(doubling_interval(1, 320)), !no_cap), "sweep_k");
    } else if (sweep_g->parsed()) {
      emit_table(cfg, sweep_ga(cfg, pops, gens), "sweep_ga");
    } else if (ablate->parsed()) {
      emit_table(cfg, ablate_ga(cfg, repeats), "ablate_ga");
    } else if (export_c->parsed()) {
      const auto paths = export_components(cfg, count, cfg.output_dir / "components");
      for (const auto& p : paths) std::cout << p.string() << '\n';
    } else if (synth->parsed()) {
      if (n) cfg.synth.n = *n;
      if (d) cfg.synth.d = *d;
      if (separation) cfg.synth.separation = *separation;
      if (noise) cfg.synth.noise = *noise;
      if (!image_shape.empty()) {
        std::size_t h = 0, w = 0;
        char x = 0, extra = 0;
        if (std::sscanf(image_shape.c_str(), "%zu%c%zu%c", &h, &x, &w, &extra) != 3 ||
            (x != 'x' && x != 'X') || h == 0 || w == 0) {
          throw Error("--images expects HxW, e.g. 32x32; got '" + image_shape + "'");
        }
        cfg.synth.image_height = h;
        cfg.synth.image_width = w;
      }
      std::cout << write_synthetic_dataset(cfg, cfg.output_dir).string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
