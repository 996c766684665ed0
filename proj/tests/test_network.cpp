#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nescodes/network.hpp"

using namespace nescodes;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// Dense multivariate normal density with covariance sigma2 * I, written out
// through the determinant and inverse of the full matrix.
double dense_log_density(const Eigen::VectorXd& mu, double sigma2, const Eigen::VectorXd& x) {
  const auto n = mu.size();
  const Eigen::MatrixXd cov = sigma2 * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd d = x - mu;
  const double quad = d.dot(cov.inverse() * d);
  return -0.5 * quad - 0.5 * std::log(cov.determinant()) -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

}  // namespace

TEST(Network, ShapeArithmetic) {
  const auto cfg = NetworkConfig::for_family(3, 63);
  EXPECT_EQ(cfg.layer_sizes(), (std::vector<std::size_t>{189, 378, 378, 189}));
  const std::size_t expected = 378 * 189 + 378 + 378 * 378 + 378 + 189 * 378 + 189;
  EXPECT_EQ(cfg.parameter_count(), expected);
  const auto p = init_network(cfg, 0.1, 1);
  EXPECT_EQ(static_cast<std::size_t>(p.theta.size()), expected);
}

TEST(Network, InitDeterministic) {
  const auto cfg = NetworkConfig::for_family(2, 5);
  const auto a = init_network(cfg, 0.1, 42);
  const auto b = init_network(cfg, 0.1, 42);
  const auto c = init_network(cfg, 0.1, 43);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_NE(a.theta, c.theta);
}

TEST(Network, InitialMeanInsideHalf) {
  for (auto [k, l] : {std::pair<std::size_t, std::size_t>{2, 5}, {3, 63}, {5, 63}}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto mu = forward(init_network(NetworkConfig::for_family(k, l), 0.1, seed));
      EXPECT_LT(mu.cwiseAbs().maxCoeff(), 0.5) << k << "x" << l << " seed " << seed;
    }
  }
}

TEST(Network, ZeroThetaGivesZeroMean) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  p.theta.setZero();
  EXPECT_EQ(forward(p), Eigen::VectorXd::Zero(10));
}

TEST(Network, MeanStaysInsideOpenInterval) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  p.theta *= 1000.0;
  EXPECT_LT(forward(p).cwiseAbs().maxCoeff(), 1.0);
}

TEST(Network, OutputBiasActsDiagonally) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 3);
  const auto before = forward(p);
  const Eigen::Index j = 4;
  p.theta[p.theta.size() - 10 + j] += 0.3;
  const auto after = forward(p);
  for (Eigen::Index i = 0; i < 10; ++i) {
    if (i == j) {
      EXPECT_NEAR(after[i], std::tanh(std::atanh(before[i]) + 0.3), 1e-12);
    } else {
      EXPECT_EQ(after[i], before[i]);
    }
  }
}

TEST(Network, RejectsNonFiniteTheta) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  p.theta[7] = std::nan("");
  EXPECT_THROW(forward(p), NumericalError);
}

TEST(LogProb, AtMean) {
  const auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  const auto mu = forward(p);
  EXPECT_NEAR(log_prob(p, mu), -(10.0 / 2.0) * std::log(2.0 * std::numbers::pi * 0.1), 1e-12);
}

TEST(LogProb, QuadraticTerm) {
  Eigen::VectorXd mu(1), x(1);
  mu << 0.2;
  x << 0.3;
  const double constant = -0.5 * std::log(2.0 * std::numbers::pi * 0.1);
  EXPECT_NEAR(log_prob(mu, 0.1, x) - constant, -0.05, 1e-12);
}

TEST(LogProb, MatchesDenseDensity) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto mu = random_vector(12, rng, 0.5);
    const auto x = random_vector(12, rng);
    const double want = dense_log_density(mu, 0.1, x);
    EXPECT_NEAR(log_prob(mu, 0.1, x), want, 1e-10 * std::abs(want));
  }
}

TEST(LogProb, DimensionMismatch) {
  EXPECT_THROW(log_prob(Eigen::VectorXd::Zero(3), 0.1, Eigen::VectorXd::Zero(4)),
               std::invalid_argument);
}

TEST(GradLogProb, ZeroAtMean) {
  const auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  EXPECT_EQ(grad_log_prob(p, forward(p)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GradLogProb, FiniteDifferences) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 5);
  std::mt19937_64 rng(5);
  const Eigen::VectorXd x = forward(p) + random_vector(10, rng, std::sqrt(0.1));
  const auto g = grad_log_prob(p, x);
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    auto plus = p, minus = p;
    plus.theta[i] += h;
    minus.theta[i] -= h;
    const double fd = (log_prob(plus, x) - log_prob(minus, x)) / (2.0 * h);
    const double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8});
    worst = std::max(worst, rel);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(GradLogProb, LinearInDisplacement) {
  const auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 6);
  std::mt19937_64 rng(6);
  const auto mu = forward(p);
  const auto delta = random_vector(10, rng, 0.2);
  const auto g1 = grad_log_prob(p, mu + delta);
  const auto g2 = grad_log_prob(p, mu + 2.0 * delta);
  EXPECT_LT((g2 - 2.0 * g1).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Adam, ZeroGradientFromRest) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  const auto theta = p.theta;
  adam_step(p, Eigen::VectorXd::Zero(p.theta.size()), 1e-3);
  EXPECT_EQ(p.theta, theta);
  EXPECT_EQ(p.adam.step, 1u);
}

TEST(Adam, ZeroGradientDecaysMoments) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  p.adam.m.setConstant(0.5);
  p.adam.v.setConstant(0.25);
  p.adam.step = 3;
  adam_step(p, Eigen::VectorXd::Zero(p.theta.size()), 1e-3);
  EXPECT_NEAR(p.adam.m[0], 0.45, 1e-15);
  EXPECT_NEAR(p.adam.v[0], 0.24975, 1e-15);
}

TEST(Adam, FirstStepAgainstGradientSign) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  std::mt19937_64 rng(2);
  const auto g = random_vector(p.theta.size(), rng);
  const auto before = p.theta;
  adam_step(p, g, 1e-3);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double step = p.theta[i] - before[i];
    EXPECT_LT(step * g[i], 0.0);
    // bias correction makes the first step exactly lr * g / (|g| + eps)
    EXPECT_NEAR(step, -1e-3 * g[i] / (std::abs(g[i]) + 1e-8), 1e-15);
  }
}

TEST(Adam, QuadraticBowl) {
  ProposalParams p;
  p.theta = Eigen::VectorXd::Constant(1, 3.0);
  p.adam.m = Eigen::VectorXd::Zero(1);
  p.adam.v = Eigen::VectorXd::Zero(1);
  auto loss = [&] { return 0.5 * p.theta[0] * p.theta[0]; };
  std::vector<double> history{loss()};
  for (int i = 0; i < 100; ++i) {
    adam_step(p, p.theta, 0.01);  // gradient of 0.5 theta^2
    history.push_back(loss());
  }
  for (std::size_t i = 5; i < history.size(); ++i) EXPECT_LT(history[i], history[i - 1]);
  EXPECT_LT(history.back(), history.front());
}

TEST(Adam, RejectsBadInput) {
  auto p = init_network(NetworkConfig::for_family(2, 5), 0.1, 1);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p.theta.size());
  EXPECT_THROW(adam_step(p, g, 0.0), std::invalid_argument);
  g[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(adam_step(p, g, 1e-3), NumericalError);
  EXPECT_THROW(adam_step(p, Eigen::VectorXd::Zero(3), 1e-3), std::invalid_argument);
}

TEST(Params, BinaryRoundTrip) {
  auto p = init_network(NetworkConfig::for_family(2, 7), 0.2, 11);
  std::mt19937_64 rng(1);
  adam_step(p, random_vector(p.theta.size(), rng), 1e-3);
  std::stringstream buf;
  write_params(buf, p);
  const auto q = read_params(buf);
  EXPECT_EQ(q.config, p.config);
  EXPECT_EQ(q.theta, p.theta);
  EXPECT_EQ(q.adam.m, p.adam.m);
  EXPECT_EQ(q.adam.v, p.adam.v);
  EXPECT_EQ(q.adam.step, p.adam.step);
  EXPECT_EQ(q.sigma2, p.sigma2);
  std::stringstream junk("not a parameter file");
  EXPECT_THROW(read_params(junk), std::runtime_error);
}
