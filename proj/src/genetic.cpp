#include "metapipe/genetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "metapipe/textio.hpp"

namespace metapipe {
namespace {

constexpr int kInitRetries = 100;

bool all_zero(const Chromosome& c) {
  return std::none_of(c.genes.begin(), c.genes.end(), [](std::uint8_t g) { return g != 0; });
}

void sort_ranked(std::vector<ScoredChromosome>& scored) {
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredChromosome& a, const ScoredChromosome& b) {
                     if (a.fitness != b.fitness) return a.fitness > b.fitness;
                     return a.chromosome > b.chromosome;
                   });
}

double checked_fitness(double f, const Chromosome& c) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw Error("fitness " + textio::g17(f) + " for chromosome " + c.hex() +
                " is outside [0, 1]");
  }
  return f;
}

}  // namespace

std::size_t Chromosome::popcount() const {
  return static_cast<std::size_t>(std::count(genes.begin(), genes.end(), std::uint8_t{1}));
}

std::string Chromosome::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t pad = (4 - genes.size() % 4) % 4;
  std::string out;
  unsigned nibble = 0;
  std::size_t bits = pad;
  for (auto g : genes) {
    nibble = (nibble << 1) | (g & 1u);
    if (++bits == 4) {
      out += kDigits[nibble];
      nibble = 0;
      bits = 0;
    }
  }
  return out;
}

Chromosome Chromosome::from_string(const std::string& bits) {
  Chromosome c;
  for (char ch : bits) {
    if (ch != '0' && ch != '1') throw Error("chromosome string must contain only 0 and 1");
    c.genes.push_back(ch == '1');
  }
  return c;
}

Chromosome Chromosome::all_ones(std::size_t length) {
  return Chromosome{std::vector<std::uint8_t>(length, 1)};
}

void GaConfig::validate() const {
  if (population_size < 4) throw Error("GA population size must be at least 4");
  if (max_generations < 1) throw Error("GA needs at least one generation");
  if (!(gene_one_prob >= 0.0 && gene_one_prob <= 1.0))
    throw Error("GA gene probability must lie in [0, 1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    throw Error("GA mutation probability must lie in [0, 1]");
  if (elite_count >= population_size) throw Error("GA elite count must be below population size");
}

std::vector<Chromosome> init_population(const GaConfig& cfg, std::size_t length, Rng& rng) {
  if (length < 1) throw Error("init_population: chromosome length must be at least 1");
  std::vector<Chromosome> pop;
  pop.reserve(cfg.population_size);
  for (std::size_t i = 0; i < cfg.population_size; ++i) {
    Chromosome c{std::vector<std::uint8_t>(length)};
    for (int attempt = 0; attempt <= kInitRetries; ++attempt) {
      for (auto& g : c.genes) g = rng.next_f64() < cfg.gene_one_prob ? 1 : 0;
      if (!all_zero(c)) break;
    }
    if (all_zero(c)) c.genes[rng.next_range(length)] = 1;
    pop.push_back(std::move(c));
  }
  return pop;
}

std::vector<ScoredChromosome> rank_population(const std::vector<Chromosome>& population,
                                              const FitnessFunction& fitness) {
  if (population.empty()) throw Error("rank_population: empty population");
  std::vector<ScoredChromosome> scored;
  scored.reserve(population.size());
  for (const auto& c : population) {
    const double f = checked_fitness(fitness(c), c);
    scored.push_back({c, f});
  }
  sort_ranked(scored);
  return scored;
}

std::vector<std::pair<Chromosome, Chromosome>> select_parent_pairs(
    const std::vector<ScoredChromosome>& ranked, Rng& rng) {
  if (ranked.size() < 4) throw Error("select_parent_pairs: population must have at least 4");
  std::size_t n_parents = ranked.size() / 2;
  n_parents -= n_parents % 2;

  std::vector<std::size_t> remaining(ranked.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<std::size_t> drawn;
  drawn.reserve(n_parents);
  while (drawn.size() < n_parents) {
    double total = 0.0;
    for (auto i : remaining) total += ranked[i].fitness;
    std::size_t pick = remaining.size() - 1;
    if (total > 0.0) {
      const double target = rng.next_f64() * total;
      double acc = 0.0;
      for (std::size_t j = 0; j < remaining.size(); ++j) {
        acc += ranked[remaining[j]].fitness;
        if (target < acc) {
          pick = j;
          break;
        }
      }
      // Rounding can leave target == acc at the end; take the last weighted entry.
      while (ranked[remaining[pick]].fitness <= 0.0 && pick > 0) --pick;
    } else {
      pick = static_cast<std::size_t>(rng.next_range(remaining.size()));
    }
    drawn.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::vector<std::pair<Chromosome, Chromosome>> pairs;
  for (std::size_t i = 0; i + 1 < drawn.size(); i += 2)
    pairs.emplace_back(ranked[drawn[i]].chromosome, ranked[drawn[i + 1]].chromosome);
  return pairs;
}

std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b,
                                               std::size_t cut) {
  if (a.size() != b.size()) throw Error("crossover: parents differ in length");
  if (a.size() < 2) throw Error("crossover: chromosomes need at least 2 genes");
  if (cut < 1 || cut >= a.size()) throw Error("crossover: cut index out of range");
  Chromosome c1 = a;
  Chromosome c2 = b;
  std::copy(b.genes.begin() + static_cast<std::ptrdiff_t>(cut), b.genes.end(),
            c1.genes.begin() + static_cast<std::ptrdiff_t>(cut));
  std::copy(a.genes.begin() + static_cast<std::ptrdiff_t>(cut), a.genes.end(),
            c2.genes.begin() + static_cast<std::ptrdiff_t>(cut));
  return {std::move(c1), std::move(c2)};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng) {
  if (a.size() != b.size()) throw Error("crossover: parents differ in length");
  if (a.size() < 2) throw Error("crossover: chromosomes need at least 2 genes");
  const auto cut = 1 + static_cast<std::size_t>(rng.next_range(a.size() - 1));
  return crossover_at(a, b, cut);
}

Chromosome mutate(Chromosome child, const GaConfig& cfg, Rng& rng) {
  if (child.genes.empty()) return child;
  if (!(rng.next_f64() < cfg.mutation_prob)) return child;
  const std::size_t n = child.size();
  const auto i = static_cast<std::size_t>(rng.next_range(n));
  child.genes[i] ^= 1;
  if (all_zero(child)) {
    if (n == 1) {
      child.genes[0] = 1;
    } else {
      auto j = static_cast<std::size_t>(rng.next_range(n - 1));
      if (j >= i) ++j;
      child.genes[j] = 1;
    }
  }
  return child;
}

GaResult evolve(const GaConfig& cfg, std::size_t length, const FitnessFunction& fitness) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::map<std::vector<std::uint8_t>, double> cache;
  GaResult result;

  auto population = init_population(cfg, length, rng);
  for (std::size_t gen = 0; gen < cfg.max_generations; ++gen) {
    std::vector<ScoredChromosome> ranked;
    ranked.reserve(population.size());
    for (auto& c : population) {
      auto it = cache.find(c.genes);
      if (it == cache.end()) {
        double f;
        try {
          f = fitness(c);
        } catch (const std::exception& e) {
          throw Error("fitness evaluation failed in generation " + std::to_string(gen) +
                      " for chromosome " + c.hex() + ": " + e.what());
        }
        it = cache.emplace(c.genes, checked_fitness(f, c)).first;
      }
      ranked.push_back({std::move(c), it->second});
    }
    sort_ranked(ranked);

    double sum = 0.0;
    for (const auto& s : ranked) sum += s.fitness;
    result.history.push_back({gen, ranked.front().fitness,
                              sum / static_cast<double>(ranked.size()), ranked.front().chromosome});
    result.best = ranked.front().chromosome;
    result.best_fitness = ranked.front().fitness;
    if (result.best_fitness >= 1.0 || gen + 1 == cfg.max_generations) break;

    std::vector<Chromosome> next;
    next.reserve(cfg.population_size);
    for (std::size_t e = 0; e < cfg.elite_count; ++e) next.push_back(ranked[e].chromosome);
    while (next.size() < cfg.population_size) {
      for (auto& [a, b] : select_parent_pairs(ranked, rng)) {
        auto children = length >= 2 ? crossover(a, b, rng) : std::pair{a, b};
        for (auto* child : {&children.first, &children.second}) {
          auto mutated = mutate(std::move(*child), cfg, rng);
          if (next.size() < cfg.population_size) next.push_back(std::move(mutated));
        }
      }
    }
    population = std::move(next);
  }
  return result;
}

Matrix apply_mask(const Matrix& x, const Chromosome& mask) {
  if (mask.size() != x.cols()) {
    throw Error("apply_mask: chromosome length " + std::to_string(mask.size()) +
                " does not match " + std::to_string(x.cols()) + " columns");
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.genes[i]) keep.push_back(i);
  return x.select_cols(keep);
}

std::string history_csv(const GaHistory& history) {
  std::string out = "generation,best_fitness,mean_fitness,best_chromosome_hex\n";
  for (const auto& h : history) {
    out += std::to_string(h.generation) + ',' + textio::fixed6(h.best_fitness) + ',' +
           textio::fixed6(h.mean_fitness) + ',' + h.best.hex() + '\n';
  }
  return out;
}

void write_history_csv(const std::filesystem::path& path, const GaHistory& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << history_csv(history);
}

}  // namespace metapipe
