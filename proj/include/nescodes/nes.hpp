#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nescodes/bitseq.hpp"
#include "nescodes/correlation.hpp"
#include "nescodes/network.hpp"
#include "nescodes/train_log.hpp"

namespace nescodes {

/// 1e-4 below length 500, 5e-5 above; 500 itself falls back to 1e-4.
double default_learning_rate(std::size_t length);

struct NesConfig {
  std::size_t count = 0;   // K
  std::size_t length = 0;  // l
  double sigma2 = 0.1;
  std::size_t batch_size = 100;
  std::size_t num_iterations = 10000;
  std::optional<double> learning_rate;  // unset: default_learning_rate(length)
  bool use_baseline = true;
  std::uint64_t master_seed = 0;

  double resolved_learning_rate() const {
    return learning_rate ? *learning_rate : default_learning_rate(length);
  }
  NetworkConfig network() const { return NetworkConfig::for_family(count, length); }
  void validate() const;
};

/// Continuous design point and its thresholded code family.
struct BatchSample {
  Eigen::VectorXd x;
  CodeFamily family;
};

/// bit_i = 1 iff x_i >= threshold, reshaped row-wise into `count` codes.
CodeFamily discretize(const Eigen::VectorXd& x, std::size_t count, std::size_t length,
                      double threshold = 0.0);

/// Draws N samples x ~ N(mu, sigma2 I). Sample i of iteration t uses the
/// stream (master_seed, t, i).
std::vector<BatchSample> sample_batch(const ProposalParams& params, const Eigen::VectorXd& mu,
                                      std::size_t batch_size, std::uint64_t master_seed,
                                      std::uint64_t iteration, std::size_t workers = 1);
std::vector<BatchSample> sample_batch(const ProposalParams& params, std::size_t batch_size,
                                      std::uint64_t master_seed, std::uint64_t iteration,
                                      std::size_t workers = 1);

std::vector<ObjectiveReport> evaluate_batch(std::span<const BatchSample> batch,
                                            std::size_t workers = 1);

/// Mean of the batch objectives.
double compute_baseline(std::span<const double> objectives);

/// (1/N) sum_i (f_i - b) grad log p(x_i), b = batch mean or 0. Because every
/// sample shares mu(theta), this is one backward pass of the weighted score.
Eigen::VectorXd estimate_gradient(const ProposalParams& params, const ForwardPass& pass,
                                  std::span<const BatchSample> batch,
                                  std::span<const double> objectives, bool use_baseline);
Eigen::VectorXd estimate_gradient(const ProposalParams& params,
                                  std::span<const BatchSample> batch,
                                  std::span<const double> objectives, bool use_baseline);

/// Everything needed to resume training bit-exactly.
struct TrainState {
  NesConfig config;
  ProposalParams params;
  std::size_t next_iteration = 0;
  std::optional<CodeFamily> best;
  ObjectiveReport best_report;
};

void write_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState read_checkpoint(const std::filesystem::path& path);

struct TrainOptions {
  std::size_t workers = 1;
  std::optional<std::filesystem::path> checkpoint_path;
  std::size_t checkpoint_every = 0;  // 0: only on abort
  /// Stop after this many iterations of the current call (for resume tests).
  std::optional<std::size_t> stop_after;
  std::function<void(const TrainRecord&)> on_iteration;
};

struct TrainResult {
  CodeFamily best;
  ObjectiveReport best_report;
  TrainLog log;
  TrainState final_state;
};

TrainState initial_state(const NesConfig& config);

/// Runs max(1, num_iterations) batches. Every batch is sampled, evaluated and
/// folded into the champion; an Adam step follows each batch unless
/// num_iterations is 0.
TrainResult train(const NesConfig& config, const TrainOptions& options = {});
TrainResult resume(TrainState state, const TrainOptions& options = {});

}  // namespace nescodes
