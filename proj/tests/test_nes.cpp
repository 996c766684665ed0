#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "nescodes/nes.hpp"

using namespace nescodes;
namespace fs = std::filesystem;

namespace {

NesConfig small_config(std::uint64_t seed, bool baseline = true) {
  NesConfig cfg;
  cfg.count = 3;
  cfg.length = 15;
  cfg.batch_size = 20;
  cfg.num_iterations = 30;
  cfg.use_baseline = baseline;
  cfg.master_seed = seed;
  return cfg;
}

std::vector<double> objectives_of(const std::vector<BatchSample>& batch) {
  std::vector<double> f;
  for (const auto& r : evaluate_batch(batch)) f.push_back(r.f);
  return f;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "nescodes_nes_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Discretize, ThresholdIsInclusive) {
  Eigen::VectorXd x(4);
  x << 0.0, -1e-300, 0.7, -0.2;
  EXPECT_EQ(discretize(x, 2, 2).flatten(), (std::vector<std::uint8_t>{1, 0, 1, 0}));
  EXPECT_THROW(discretize(x, 3, 2), std::invalid_argument);
}

TEST(Sampling, ZeroMeanGivesFairBits) {
  const auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  const auto batch = sample_batch(p, Eigen::VectorXd::Zero(10), 20000, 3, 0);
  double ones = 0.0;
  for (const auto& s : batch) {
    for (auto b : s.family.flatten()) ones += b;
  }
  const double n = 200000.0;
  EXPECT_NEAR(ones / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(Sampling, BiasedMean) {
  const auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  const auto batch = sample_batch(p, Eigen::VectorXd::Constant(10, 0.9), 100000, 4, 0);
  double ones = 0.0;
  for (const auto& s : batch) {
    for (auto b : s.family.flatten()) ones += b;
  }
  const double n = 1e6;
  const double prob = 0.5 * std::erfc(-0.9 / std::sqrt(0.1) / std::sqrt(2.0));
  EXPECT_NEAR(prob, 0.9978, 1e-4);
  EXPECT_NEAR(ones / n, prob, 3.0 * std::sqrt(prob * (1.0 - prob) / n));
}

TEST(Baseline, Values) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(compute_baseline(a), 2.0);
  const std::vector<double> c(37, 0.0123456789);
  EXPECT_EQ(compute_baseline(c), 0.0123456789);
  EXPECT_THROW(compute_baseline(std::vector<double>{}), std::invalid_argument);
}

TEST(Baseline, MatchesCompensatedSum) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  std::vector<double> f(1000);
  for (auto& v : f) v = u(rng);
  long double sum = 0.0L;
  for (double v : f) sum += v;
  EXPECT_NEAR(compute_baseline(f), static_cast<double>(sum / f.size()), 1e-12);
}

TEST(Gradient, ConstantObjectivesGiveZero) {
  const auto cfg = small_config(1);
  const auto p = init_network(cfg.network(), cfg.sigma2, 1);
  const auto batch = sample_batch(p, 25, 1, 0);
  const std::vector<double> f(25, 0.0371);
  const auto g = estimate_gradient(p, batch, f, true);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, SingleSampleWithBaselineIsZero) {
  const auto cfg = small_config(2);
  const auto p = init_network(cfg.network(), cfg.sigma2, 2);
  const auto batch = sample_batch(p, 1, 2, 0);
  const auto f = objectives_of(batch);
  EXPECT_EQ(estimate_gradient(p, batch, f, true).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(estimate_gradient(p, batch, f, false).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, EqualsMeanOfWeightedScores) {
  const auto cfg = small_config(3);
  const auto p = init_network(cfg.network(), cfg.sigma2, 3);
  const auto batch = sample_batch(p, 8, 3, 0);
  const auto f = objectives_of(batch);
  const double b = std::accumulate(f.begin(), f.end(), 0.0) / 8.0;
  Eigen::VectorXd want = Eigen::VectorXd::Zero(p.theta.size());
  for (std::size_t i = 0; i < 8; ++i) want += (f[i] - b) * grad_log_prob(p, batch[i].x);
  want /= 8.0;
  const auto got = estimate_gradient(p, batch, f, true);
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
}

// Score function has zero mean under its own distribution.
TEST(Gradient, ScoreHasZeroMean) {
  const auto p = init_network(NetworkConfig::for_family(1, 2), 0.1, 4);
  const auto batch = sample_batch(p, 10000, 4, 0);
  const auto dim = p.theta.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim), sq = Eigen::VectorXd::Zero(dim);
  for (const auto& s : batch) {
    const auto g = grad_log_prob(p, s.x);
    sum += g;
    sq += g.cwiseProduct(g);
  }
  const double n = 10000.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double mean = sum[i] / n;
    const double var = sq[i] / n - mean * mean;
    EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(var / n) + 1e-15) << "coordinate " << i;
  }
}

struct GradientStats {
  Eigen::VectorXd mean_with, mean_without, var_with, var_without;
};

GradientStats gradient_study(std::size_t batches, std::size_t batch_size) {
  const auto cfg = small_config(5);
  const auto p = init_network(NetworkConfig::for_family(2, 7), cfg.sigma2, 5);
  const auto pass = forward_pass(p);
  const auto dim = p.theta.size();
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(dim), q1 = s1, s0 = s1, q0 = s1;
  for (std::size_t t = 0; t < batches; ++t) {
    const auto batch = sample_batch(p, pass.mu(), batch_size, 5, t);
    const auto f = objectives_of(batch);
    const auto gw = estimate_gradient(p, pass, batch, f, true);
    const auto go = estimate_gradient(p, pass, batch, f, false);
    s1 += gw;
    q1 += gw.cwiseProduct(gw);
    s0 += go;
    q0 += go.cwiseProduct(go);
  }
  const double n = static_cast<double>(batches);
  GradientStats st;
  st.mean_with = s1 / n;
  st.mean_without = s0 / n;
  st.var_with = q1 / n - st.mean_with.cwiseProduct(st.mean_with);
  st.var_without = q0 / n - st.mean_without.cwiseProduct(st.mean_without);
  return st;
}

TEST(Gradient, BaselineReducesVariance) {
  const auto st = gradient_study(200, 20);
  std::size_t lower = 0;
  for (Eigen::Index i = 0; i < st.var_with.size(); ++i) lower += st.var_with[i] <= st.var_without[i];
  EXPECT_GE(static_cast<double>(lower), 0.9 * static_cast<double>(st.var_with.size()));
}

TEST(Gradient, BaselineKeepsTheMean) {
  const std::size_t batches = 400;
  const auto st = gradient_study(batches, 20);
  std::size_t agree = 0;
  for (Eigen::Index i = 0; i < st.mean_with.size(); ++i) {
    const double se = std::sqrt((st.var_with[i] + st.var_without[i]) / batches);
    agree += std::abs(st.mean_with[i] - st.mean_without[i]) <= 3.0 * se + 1e-15;
  }
  EXPECT_GE(static_cast<double>(agree), 0.98 * static_cast<double>(st.mean_with.size()));
}

TEST(Train, ZeroIterationsIsBestOfInitialBatch) {
  auto cfg = small_config(6);
  cfg.num_iterations = 0;
  const auto result = train(cfg);
  const auto state = initial_state(cfg);
  const auto batch = sample_batch(state.params, cfg.batch_size, cfg.master_seed, 0);
  const auto f = objectives_of(batch);
  EXPECT_EQ(result.best_report.f, *std::min_element(f.begin(), f.end()));
  EXPECT_EQ(result.final_state.params.theta, state.params.theta);
  EXPECT_EQ(result.log.records.size(), 1u);
}

TEST(Train, Deterministic) {
  const auto cfg = small_config(7);
  const auto a = train(cfg);
  TrainOptions opt;
  opt.workers = 3;
  const auto b = train(cfg, opt);
  EXPECT_EQ(format_log_csv(a.log), format_log_csv(b.log));
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.final_state.params.theta, b.final_state.params.theta);
}

TEST(Train, BestSoFarMonotoneAndChampionReevaluates) {
  const auto r = train(small_config(8));
  for (std::size_t i = 1; i < r.log.records.size(); ++i) {
    EXPECT_LE(r.log.records[i].best_f, r.log.records[i - 1].best_f);
  }
  EXPECT_EQ(evaluate_family(r.best), r.best_report);
  EXPECT_EQ(r.log.records.back().best_f, r.best_report.f);
}

TEST(Train, BaselineDoesNotChangeFirstBatch) {
  auto with = small_config(9, true);
  auto without = small_config(9, false);
  with.num_iterations = without.num_iterations = 1;
  const auto a = train(with);
  const auto b = train(without);
  EXPECT_EQ(a.log.records[0].mean_f, b.log.records[0].mean_f);
  EXPECT_EQ(a.log.records[0].min_f, b.log.records[0].min_f);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(b.log.records[0].baseline, 0.0);
}

TEST(Train, ResumeFromCheckpointIsExact) {
  const auto cfg = small_config(10);
  const auto straight = train(cfg);

  const auto ckpt = scratch("resume.ckpt");
  TrainOptions first;
  first.checkpoint_path = ckpt;
  first.checkpoint_every = 1;
  first.stop_after = 12;
  const auto part = train(cfg, first);
  EXPECT_EQ(part.log.records.size(), 12u);

  const auto rest = resume(read_checkpoint(ckpt));
  auto records = part.log.records;
  records.insert(records.end(), rest.log.records.begin(), rest.log.records.end());
  EXPECT_EQ(records, straight.log.records);
  EXPECT_EQ(rest.best, straight.best);
  EXPECT_EQ(rest.final_state.params.theta, straight.final_state.params.theta);
}

TEST(Train, NonFiniteParametersAbortWithCheckpoint) {
  auto state = initial_state(small_config(11));
  state.params.theta[0] = std::numeric_limits<double>::quiet_NaN();
  const auto ckpt = scratch("abort.ckpt");
  auto diag = ckpt;
  diag += ".abort";
  fs::remove(diag);
  TrainOptions opt;
  opt.checkpoint_path = ckpt;
  EXPECT_THROW(resume(state, opt), NumericalError);
  EXPECT_TRUE(fs::exists(diag));
}

TEST(Train, ConfigValidation) {
  auto cfg = small_config(1);
  cfg.count = 1;
  EXPECT_THROW(train(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.sigma2 = 0.0;
  EXPECT_THROW(train(cfg), std::invalid_argument);
  EXPECT_EQ(default_learning_rate(500), 1e-4);
  EXPECT_EQ(default_learning_rate(511), 5e-5);
}

// ~15 s: three full desk-scale runs.
TEST(TrainSlow, ImprovesOnInitialBatch) {
  for (std::uint64_t seed : {1, 2, 3}) {
    NesConfig cfg;
    cfg.count = 3;
    cfg.length = 63;
    cfg.batch_size = 50;
    cfg.num_iterations = 1500;
    cfg.master_seed = seed;
    const auto r = train(cfg);
    double first_best = r.log.records.front().min_f;
    EXPECT_LT(r.best_report.f, first_best) << "seed " << seed;
  }
}
