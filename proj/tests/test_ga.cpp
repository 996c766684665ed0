#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nescodes/ga.hpp"

using namespace nescodes;

namespace {

Individual with_f(double f) {
  Individual ind;
  ind.genome = {0, 1};
  ind.report = {f, f, f};
  return ind;
}

}  // namespace

TEST(Selection, EqualFitnessIsUniform) {
  const std::vector<Individual> pop(4, with_f(0.2));
  const auto w = selection_weights(pop);
  RandomEngine rng(1);
  std::vector<double> counts(4, 0.0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) counts[select_index(w, rng)] += 1.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 4.0) * (c - draws / 4.0) / (draws / 4.0);
  EXPECT_LT(chi2, 11.345);  // chi-square, 3 dof, alpha 0.01
}

TEST(Selection, ProportionalToWeights) {
  const std::vector<double> w{3.0, 1.0};
  RandomEngine rng(2);
  const int draws = 10000;
  int first = 0;
  for (int i = 0; i < draws; ++i) first += select_index(w, rng) == 0;
  const double sd = std::sqrt(draws * 0.75 * 0.25);
  EXPECT_NEAR(first, 0.75 * draws, 3.0 * sd);
}

TEST(Selection, WeightsFavourLowObjective) {
  const std::vector<Individual> pop{with_f(0.1), with_f(0.3), with_f(0.2)};
  const auto w = selection_weights(pop);
  EXPECT_GT(w[0], w[2]);
  EXPECT_GT(w[2], w[1]);
  EXPECT_EQ(w[1], kFitnessEpsilon);
}

TEST(Selection, SingleMember) {
  const std::vector<Individual> pop{with_f(0.4)};
  RandomEngine rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(&select_parent(pop, rng), &pop[0]);
}

TEST(Crossover, IdenticalParents) {
  RandomEngine rng(4);
  const Genome a{1, 0, 1, 1, 0};
  const auto [c1, c2] = crossover_uniform(a, a, rng);
  EXPECT_EQ(c1, a);
  EXPECT_EQ(c2, a);
}

TEST(Crossover, ChildrenTakeParentBits) {
  RandomEngine rng(5);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 100; ++rep) {
    Genome a(30), b(30);
    for (auto& x : a) x = coin(rng);
    for (auto& x : b) x = coin(rng);
    const auto [c1, c2] = crossover_uniform(a, b, rng);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_TRUE(c1[i] == a[i] || c1[i] == b[i]);
      EXPECT_EQ(c1[i] ^ c2[i], a[i] ^ b[i]);
    }
  }
}

TEST(Crossover, FairInheritance) {
  RandomEngine rng(6);
  const Genome a(16, 0), b(16, 1);
  std::vector<int> from_a(16, 0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto [c1, c2] = crossover_uniform(a, b, rng);
    for (std::size_t i = 0; i < 16; ++i) from_a[i] += c1[i] == 0;
  }
  const double sd = std::sqrt(trials * 0.25);
  for (int c : from_a) EXPECT_NEAR(c, trials / 2.0, 3.0 * sd);
}

TEST(Mutation, Extremes) {
  RandomEngine rng(7);
  const Genome g{1, 0, 0, 1, 1};
  EXPECT_EQ(mutate(g, 0.0, rng), g);
  EXPECT_EQ(mutate(g, 1.0, rng), (Genome{0, 1, 1, 0, 0}));
  EXPECT_THROW(mutate(g, 1.5, rng), std::invalid_argument);
}

TEST(Mutation, MeanFlips) {
  RandomEngine rng(8);
  const Genome g(635, 0);
  double total = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    for (auto b : mutate(g, 0.005, rng)) total += b;
  }
  const double mean = total / trials;
  const double sd = std::sqrt(635 * 0.005 * 0.995 / trials);
  EXPECT_NEAR(mean, 3.175, 3.0 * sd);
}

TEST(Generation, ElitesCarriedUnchanged) {
  GaConfig cfg{3, 15, 40, 200, 0.05, 0.01, 9};
  std::vector<std::vector<Individual>> history;
  GaOptions opt;
  opt.on_generation = [&](std::size_t, const std::vector<Individual>& pop) { history.push_back(pop); };
  ga_run(cfg, opt);
  ASSERT_EQ(history.size(), 201u);
  const auto elites = cfg.elite_count();
  EXPECT_EQ(elites, 2u);
  for (std::size_t g = 1; g < history.size(); ++g) {
    auto prev = history[g - 1];
    std::stable_sort(prev.begin(), prev.end(),
                     [](const Individual& a, const Individual& b) { return a.report.f < b.report.f; });
    for (std::size_t e = 0; e < elites; ++e) {
      ASSERT_EQ(history[g][e].genome, prev[e].genome) << "generation " << g;
      ASSERT_EQ(history[g][e].report, prev[e].report);
    }
  }
}

TEST(Generation, ZeroMutationKeepsUniformPopulation) {
  GaConfig cfg{2, 7, 10, 1, 0.1, 0.0, 1};
  std::vector<Individual> pop(10);
  for (auto& ind : pop) {
    ind.genome = {0, 1, 1, 0, 1, 0, 0, 1, 0, 0, 1, 1, 1, 0};
    ind.report = evaluate_bits(ind.genome, 2, 7);
  }
  const auto next = next_generation(pop, cfg, 1);
  for (const auto& ind : next) {
    EXPECT_EQ(ind.genome, pop[0].genome);
    EXPECT_EQ(ind.report, pop[0].report);
  }
}

TEST(Run, BestSoFarNonIncreasingOverManyGenerations) {
  GaConfig cfg{2, 7, 10, 10000, 0.1, 0.02, 3};
  const auto r = ga_run(cfg);
  ASSERT_EQ(r.log.records.size(), 10001u);
  for (std::size_t i = 1; i < r.log.records.size(); ++i) {
    ASSERT_LE(r.log.records[i].best_f, r.log.records[i - 1].best_f);
    // with elitism the population minimum itself never rises
    ASSERT_LE(r.log.records[i].min_f, r.log.records[i - 1].min_f);
  }
  EXPECT_EQ(evaluate_family(r.best), r.best_report);
}

TEST(Run, Deterministic) {
  GaConfig cfg{3, 15, 30, 50, 0.01, 0.005, 4};
  const auto a = ga_run(cfg);
  GaOptions opt;
  opt.workers = 3;
  const auto b = ga_run(cfg, opt);
  EXPECT_EQ(format_log_csv(a.log), format_log_csv(b.log));
  EXPECT_EQ(a.best, b.best);
}

TEST(Run, ConfigValidation) {
  EXPECT_THROW(ga_run(GaConfig{1, 15, 30, 5, 0.01, 0.005, 1}), std::invalid_argument);
  EXPECT_THROW(ga_run(GaConfig{3, 15, 30, 5, 0.01, 0.0, 1}), std::invalid_argument);
  EXPECT_THROW(ga_run(GaConfig{3, 15, 1, 5, 0.01, 0.005, 1}), std::invalid_argument);
  EXPECT_EQ((GaConfig{3, 15, 100, 5, 0.01, 0.005, 1}.elite_count()), 1u);
  EXPECT_EQ((GaConfig{3, 15, 50, 5, 0.01, 0.005, 1}.elite_count()), 1u);
}

// ~10 s: desk-scale smoke runs.
TEST(RunSlow, ImprovesOnInitialPopulation) {
  for (std::uint64_t seed : {1, 2, 3}) {
    GaConfig cfg{3, 63, 100, 1500, 0.01, 0.005, seed};
    const auto r = ga_run(cfg);
    EXPECT_LT(r.best_report.f, r.log.records.front().best_f) << "seed " << seed;
  }
}
