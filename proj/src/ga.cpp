#include "nescodes/ga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nescodes/parallel.hpp"

namespace nescodes {

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kGenerationStream = 1;

void evaluate_all(std::vector<Individual>& population, std::size_t begin, const GaConfig& cfg,
                  std::size_t workers) {
  parallel_for(population.size() - begin, workers, [&](std::size_t i) {
    auto& ind = population[begin + i];
    ind.report = evaluate_bits(ind.genome, cfg.count, cfg.length);
  });
}

TrainRecord summarize(std::size_t generation, const std::vector<Individual>& population,
                      double best_so_far) {
  TrainRecord r;
  r.iteration = generation;
  double sum = 0.0;
  r.min_f = population.front().report.f;
  for (const auto& ind : population) {
    sum += ind.report.f;
    r.min_f = std::min(r.min_f, ind.report.f);
  }
  r.mean_f = sum / static_cast<double>(population.size());
  r.best_f = best_so_far;
  return r;
}

}  // namespace

std::size_t GaConfig::elite_count() const {
  const auto rounded =
      static_cast<std::size_t>(std::llround(elite_rate * static_cast<double>(population_size)));
  return std::max<std::size_t>(1, rounded);
}

void GaConfig::validate() const {
  if (count < 2 || length < 2) throw std::invalid_argument("GA needs K >= 2 and length >= 2");
  if (population_size < 2) throw std::invalid_argument("GA population must be at least 2");
  if (!(mutation_rate > 0.0 && mutation_rate < 1.0)) {
    throw std::invalid_argument("GA mutation rate must lie in (0, 1)");
  }
  if (!(elite_rate >= 0.0 && elite_rate < 1.0)) throw std::invalid_argument("GA elite rate must lie in [0, 1)");
  if (elite_count() >= population_size) throw std::invalid_argument("GA elite count fills the population");
}

std::vector<double> selection_weights(std::span<const Individual> population) {
  double worst = population.front().report.f;
  for (const auto& ind : population) worst = std::max(worst, ind.report.f);
  std::vector<double> weights(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    weights[i] = (worst - population[i].report.f) + kFitnessEpsilon;
  }
  return weights;
}

std::size_t select_index(std::span<const double> weights, RandomEngine& rng) {
  if (weights.empty()) throw std::invalid_argument("selection from an empty population");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::uniform_real_distribution<double> dist(0.0, total);
  const double u = dist(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  return weights.size() - 1;
}

const Individual& select_parent(std::span<const Individual> population, RandomEngine& rng) {
  if (population.empty()) throw std::invalid_argument("selection from an empty population");
  const auto weights = selection_weights(population);
  return population[select_index(weights, rng)];
}

std::pair<Genome, Genome> crossover_uniform(const Genome& a, const Genome& b, RandomEngine& rng) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover of genomes with different lengths");
  Genome c1(a.size()), c2(a.size());
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (coin(rng)) {
      c1[i] = a[i];
      c2[i] = b[i];
    } else {
      c1[i] = b[i];
      c2[i] = a[i];
    }
  }
  return {std::move(c1), std::move(c2)};
}

Genome mutate(Genome genome, double rate, RandomEngine& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("mutation rate outside [0, 1]");
  std::bernoulli_distribution flip(rate);
  for (auto& bit : genome) {
    if (flip(rng)) bit ^= 1;
  }
  return genome;
}

std::vector<Individual> next_generation(const std::vector<Individual>& population,
                                        const GaConfig& cfg, std::uint64_t generation,
                                        std::size_t workers) {
  const std::size_t elites = cfg.elite_count();
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return population[a].report.f < population[b].report.f;
  });

  std::vector<Individual> next;
  next.reserve(population.size() + 1);
  for (std::size_t e = 0; e < elites && e < population.size(); ++e) {
    next.push_back(population[order[e]]);
  }

  auto rng = make_stream(cfg.master_seed, {kGenerationStream, generation});
  const auto weights = selection_weights(population);
  while (next.size() < population.size()) {
    const auto& a = population[select_index(weights, rng)];
    const auto& b = population[select_index(weights, rng)];
    auto [c1, c2] = crossover_uniform(a.genome, b.genome, rng);
    next.push_back(Individual{mutate(std::move(c1), cfg.mutation_rate, rng), {}});
    next.push_back(Individual{mutate(std::move(c2), cfg.mutation_rate, rng), {}});
  }
  next.resize(population.size());
  evaluate_all(next, std::min(elites, next.size()), cfg, workers);
  return next;
}

GaResult ga_run(const GaConfig& cfg, const GaOptions& options) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t genome_size = cfg.count * cfg.length;
  std::vector<Individual> population(cfg.population_size);
  for (std::size_t i = 0; i < population.size(); ++i) {
    auto rng = make_stream(cfg.master_seed, {kInitStream, i});
    std::bernoulli_distribution bit(0.5);
    population[i].genome.resize(genome_size);
    for (auto& b : population[i].genome) b = bit(rng) ? 1 : 0;
  }
  evaluate_all(population, 0, cfg, options.workers);

  GaResult result;
  bool has_best = false;
  auto track_best = [&] {
    for (const auto& ind : population) {
      if (!has_best || ind.report.f < result.best_report.f) {
        result.best_report = ind.report;
        result.best = CodeFamily::from_flat(ind.genome, cfg.count, cfg.length);
        has_best = true;
      }
    }
  };
  track_best();
  result.log.records.push_back(summarize(0, population, result.best_report.f));
  if (options.on_generation) options.on_generation(0, population);

  for (std::size_t gen = 1; gen <= cfg.num_iterations; ++gen) {
    population = next_generation(population, cfg, gen, options.workers);
    track_best();
    result.log.records.push_back(summarize(gen, population, result.best_report.f));
    if (options.on_generation) options.on_generation(gen, population);
  }

  result.log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace nescodes
