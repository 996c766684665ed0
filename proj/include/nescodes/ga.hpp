#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "nescodes/bitseq.hpp"
#include "nescodes/correlation.hpp"
#include "nescodes/rng.hpp"
#include "nescodes/train_log.hpp"

namespace nescodes {

struct GaConfig {
  std::size_t count = 0;   // K
  std::size_t length = 0;  // l
  std::size_t population_size = 100;
  std::size_t num_iterations = 10000;
  double elite_rate = 0.01;
  double mutation_rate = 0.005;  // per-bit flip probability
  std::uint64_t master_seed = 0;

  /// max(1, round(elite_rate * population_size))
  std::size_t elite_count() const;
  void validate() const;
};

using Genome = std::vector<std::uint8_t>;

/// A flat K*l genome and its cached objective.
struct Individual {
  Genome genome;
  ObjectiveReport report;
};

/// Selection weight of member i: (f_max - f_i) + epsilon.
inline constexpr double kFitnessEpsilon = 1e-12;
std::vector<double> selection_weights(std::span<const Individual> population);

/// Index drawn with probability proportional to weights[i].
std::size_t select_index(std::span<const double> weights, RandomEngine& rng);

const Individual& select_parent(std::span<const Individual> population, RandomEngine& rng);

/// Each position independently goes to child 1 from a or b by a fair coin;
/// child 2 takes the other parent's bit.
std::pair<Genome, Genome> crossover_uniform(const Genome& a, const Genome& b, RandomEngine& rng);

/// Flips each bit independently with probability rate.
Genome mutate(Genome genome, double rate, RandomEngine& rng);

/// One generation: the elite_count() best individuals are copied unchanged to
/// the front, the rest are bred by select -> crossover -> mutate and evaluated.
/// Does not validate the mutation rate, so rate 0 is allowed here.
std::vector<Individual> next_generation(const std::vector<Individual>& population,
                                        const GaConfig& config, std::uint64_t generation,
                                        std::size_t workers = 1);

struct GaOptions {
  std::size_t workers = 1;
  /// Called with the population after initialization (generation 0) and after
  /// every generation. Elites occupy the leading elite_count() slots.
  std::function<void(std::size_t, const std::vector<Individual>&)> on_generation;
};

struct GaResult {
  CodeFamily best;
  ObjectiveReport best_report;
  TrainLog log;
};

/// Log row 0 is the initial population; rows 1..num_iterations are generations.
GaResult ga_run(const GaConfig& config, const GaOptions& options = {});

}  // namespace nescodes
