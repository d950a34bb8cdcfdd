#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "metapipe/core.hpp"

namespace metapipe {

/// Binary feature-inclusion mask. Gene i set means feature i is kept.
struct Chromosome {
  std::vector<std::uint8_t> genes;

  std::size_t size() const { return genes.size(); }
  std::size_t popcount() const;
  /// Genes read as a big-endian bit string, left-padded to whole hex digits.
  std::string hex() const;
  static Chromosome from_string(const std::string& bits);
  static Chromosome all_ones(std::size_t length);

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
  /// Lexicographic on genes, i.e. numeric order of the big-endian bit pattern.
  friend auto operator<=>(const Chromosome&, const Chromosome&) = default;
};

struct GaConfig {
  std::size_t population_size = 20;
  std::size_t max_generations = 50;
  double gene_one_prob = 0.5;
  double mutation_prob = 0.25;
  std::size_t elite_count = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Maps a chromosome to a score in [0, 1]. Must be deterministic within one evolve call.
using FitnessFunction = std::function<double(const Chromosome&)>;

struct ScoredChromosome {
  Chromosome chromosome;
  double fitness = 0.0;
};

struct GenerationRecord {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  Chromosome best;
};

using GaHistory = std::vector<GenerationRecord>;

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  GaHistory history;
};

std::vector<Chromosome> init_population(const GaConfig& cfg, std::size_t length, Rng& rng);

/// Descending fitness; equal fitness puts the larger bit pattern first.
std::vector<ScoredChromosome> rank_population(const std::vector<Chromosome>& population,
                                              const FitnessFunction& fitness);

/// Fitness-weighted draws without replacement of floor(P/2) parents (rounded
/// down to even), paired in draw order. Falls back to uniform draws when the
/// remaining weight is zero.
std::vector<std::pair<Chromosome, Chromosome>> select_parent_pairs(
    const std::vector<ScoredChromosome>& ranked, Rng& rng);

/// Single-point crossover with the cut drawn uniformly from [1, L-1].
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng);
/// Crossover at a fixed cut: a[0, cut) + b[cut, L) and b[0, cut) + a[cut, L).
std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b,
                                               std::size_t cut);

/// With probability mutation_prob flips one uniformly chosen gene. If that
/// empties the mask, a second distinct gene is set.
Chromosome mutate(Chromosome child, const GaConfig& cfg, Rng& rng);

/// Runs generations until max_generations or a perfect fitness of 1.0.
GaResult evolve(const GaConfig& cfg, std::size_t length, const FitnessFunction& fitness);

/// Keeps the columns whose gene is set, in order.
Matrix apply_mask(const Matrix& x, const Chromosome& mask);

/// `generation,best_fitness,mean_fitness,best_chromosome_hex`
void write_history_csv(const std::filesystem::path& path, const GaHistory& history);
std::string history_csv(const GaHistory& history);

}  // namespace metapipe
