#include "nescodes/nes.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "nescodes/family_io.hpp"
#include "nescodes/parallel.hpp"
#include "nescodes/rng.hpp"

namespace nescodes {

namespace {

// Stream keys under the master seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kSampleStream = 1;

}  // namespace

double default_learning_rate(std::size_t length) { return length > 500 ? 5e-5 : 1e-4; }

void NesConfig::validate() const {
  if (count < 2) throw std::invalid_argument("NES needs a family of at least 2 codes");
  if (length < 2) throw std::invalid_argument("NES needs code length >= 2");
  if (batch_size < 2) throw std::invalid_argument("NES batch size must be at least 2");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("sigma2 must be > 0");
  if (!(resolved_learning_rate() > 0.0)) throw std::invalid_argument("learning rate must be > 0");
}

CodeFamily discretize(const Eigen::VectorXd& x, std::size_t count, std::size_t length,
                      double threshold) {
  if (static_cast<std::size_t>(x.size()) != count * length) {
    throw std::invalid_argument("discretize: vector size does not match K * length");
  }
  std::vector<std::uint8_t> bits(count * length);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = x[static_cast<Eigen::Index>(i)] >= threshold ? 1 : 0;
  }
  return CodeFamily::from_flat(bits, count, length);
}

std::vector<BatchSample> sample_batch(const ProposalParams& params, const Eigen::VectorXd& mu,
                                      std::size_t batch_size, std::uint64_t master_seed,
                                      std::uint64_t iteration, std::size_t workers) {
  const auto& cfg = params.config;
  const double sigma = std::sqrt(params.sigma2);
  const double threshold = cfg.threshold();
  std::vector<BatchSample> batch(batch_size);
  parallel_for(batch_size, workers, [&](std::size_t i) {
    auto rng = make_stream(master_seed, {kSampleStream, iteration, i});
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x(mu.size());
    for (Eigen::Index j = 0; j < mu.size(); ++j) x[j] = mu[j] + sigma * normal(rng);
    batch[i].family = discretize(x, cfg.count, cfg.length, threshold);
    batch[i].x = std::move(x);
  });
  return batch;
}

std::vector<BatchSample> sample_batch(const ProposalParams& params, std::size_t batch_size,
                                      std::uint64_t master_seed, std::uint64_t iteration,
                                      std::size_t workers) {
  return sample_batch(params, forward(params), batch_size, master_seed, iteration, workers);
}

std::vector<ObjectiveReport> evaluate_batch(std::span<const BatchSample> batch,
                                            std::size_t workers) {
  std::vector<ObjectiveReport> reports(batch.size());
  parallel_for(batch.size(), workers,
               [&](std::size_t i) { reports[i] = evaluate_family(batch[i].family); });
  return reports;
}

double compute_baseline(std::span<const double> objectives) {
  if (objectives.empty()) throw std::invalid_argument("baseline of an empty batch");
  // Running mean: a constant batch returns its value exactly, so f - b is 0.
  double mean = 0.0;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    mean += (objectives[i] - mean) / static_cast<double>(i + 1);
  }
  return mean;
}

Eigen::VectorXd estimate_gradient(const ProposalParams& params, const ForwardPass& pass,
                                  std::span<const BatchSample> batch,
                                  std::span<const double> objectives, bool use_baseline) {
  if (batch.size() != objectives.size()) {
    throw std::invalid_argument("estimate_gradient: batch and objective counts differ");
  }
  if (batch.empty()) throw std::invalid_argument("estimate_gradient: empty batch");
  const double baseline = use_baseline ? compute_baseline(objectives) : 0.0;
  const auto& mu = pass.mu();
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(mu.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    weighted += (objectives[i] - baseline) * (batch[i].x - mu);
  }
  weighted /= static_cast<double>(batch.size()) * params.sigma2;
  return backprop(params, pass, weighted);
}

Eigen::VectorXd estimate_gradient(const ProposalParams& params,
                                  std::span<const BatchSample> batch,
                                  std::span<const double> objectives, bool use_baseline) {
  return estimate_gradient(params, forward_pass(params), batch, objectives, use_baseline);
}

// Checkpoint layout: magic, version, NES config, progress, champion (family
// text), then the network parameter stream.
namespace {

constexpr char kCheckpointMagic[8] = {'N', 'E', 'S', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw std::runtime_error("checkpoint truncated");
  }
  return value;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint " + path.string());
  const auto& c = state.config;
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint64_t>(out, c.count);
  put<std::uint64_t>(out, c.length);
  put(out, c.sigma2);
  put<std::uint64_t>(out, c.batch_size);
  put<std::uint64_t>(out, c.num_iterations);
  put<std::uint8_t>(out, c.learning_rate.has_value());
  put(out, c.learning_rate.value_or(0.0));
  put<std::uint8_t>(out, c.use_baseline);
  put<std::uint64_t>(out, c.master_seed);
  put<std::uint64_t>(out, state.next_iteration);
  put<std::uint8_t>(out, state.best.has_value());
  const std::string family =
      state.best ? format_family(FamilyFile{*state.best, c.master_seed, "nes"}) : std::string();
  put<std::uint64_t>(out, family.size());
  out.write(family.data(), static_cast<std::streamsize>(family.size()));
  put(out, state.best_report.f_ac);
  put(out, state.best_report.f_cc);
  put(out, state.best_report.f);
  write_params(out, state.params);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

TrainState read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw std::runtime_error(path.string() + " is not a NES checkpoint");
  }
  TrainState s;
  auto& c = s.config;
  c.count = get<std::uint64_t>(in);
  c.length = get<std::uint64_t>(in);
  c.sigma2 = get<double>(in);
  c.batch_size = get<std::uint64_t>(in);
  c.num_iterations = get<std::uint64_t>(in);
  const bool has_lr = get<std::uint8_t>(in) != 0;
  const double lr = get<double>(in);
  if (has_lr) c.learning_rate = lr;
  c.use_baseline = get<std::uint8_t>(in) != 0;
  c.master_seed = get<std::uint64_t>(in);
  s.next_iteration = get<std::uint64_t>(in);
  const bool has_best = get<std::uint8_t>(in) != 0;
  std::string family(get<std::uint64_t>(in), '\0');
  if (!in.read(family.data(), static_cast<std::streamsize>(family.size()))) {
    throw std::runtime_error("checkpoint truncated");
  }
  if (has_best) s.best = parse_family(family).family;
  s.best_report.f_ac = get<double>(in);
  s.best_report.f_cc = get<double>(in);
  s.best_report.f = get<double>(in);
  s.params = read_params(in);
  return s;
}

TrainState initial_state(const NesConfig& config) {
  config.validate();
  TrainState state;
  state.config = config;
  state.params = init_network(config.network(), config.sigma2,
                              derive_seed(config.master_seed, {kInitStream}));
  return state;
}

TrainResult resume(TrainState state, const TrainOptions& options) {
  const auto& cfg = state.config;
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t total_batches = std::max<std::size_t>(1, cfg.num_iterations);
  const double lr = cfg.resolved_learning_rate();
  const double threshold = state.params.config.threshold();

  TrainResult result;
  std::size_t done = 0;
  for (std::size_t it = state.next_iteration; it < total_batches; ++it) {
    if (options.stop_after && done >= *options.stop_after) break;
    try {
      const auto pass = forward_pass(state.params);
      const auto batch =
          sample_batch(state.params, pass.mu(), cfg.batch_size, cfg.master_seed, it, options.workers);
      const auto reports = evaluate_batch(batch, options.workers);

      std::vector<double> objectives(reports.size());
      for (std::size_t i = 0; i < reports.size(); ++i) {
        objectives[i] = reports[i].f;
        if (!state.best || reports[i].f < state.best_report.f) {
          state.best = batch[i].family;
          state.best_report = reports[i];
        }
      }

      TrainRecord record;
      record.iteration = it;
      record.mean_f = compute_baseline(objectives);
      record.min_f = *std::min_element(objectives.begin(), objectives.end());
      record.baseline = cfg.use_baseline ? record.mean_f : 0.0;
      record.best_f = state.best_report.f;

      auto grad = estimate_gradient(state.params, pass, batch, objectives, cfg.use_baseline);
      record.grad_norm = grad.norm();
      result.log.records.push_back(record);
      result.log.mean_discretization_f.push_back(
          evaluate_family(discretize(pass.mu(), cfg.count, cfg.length, threshold)).f);

      if (cfg.num_iterations > 0) adam_step(state.params, grad, lr);
      if (options.on_iteration) options.on_iteration(record);
    } catch (const NumericalError&) {
      // Leave the last good state behind for diagnosis.
      if (options.checkpoint_path) {
        auto diag = *options.checkpoint_path;
        diag += ".abort";
        write_checkpoint(diag, state);
      }
      throw;
    }
    state.next_iteration = it + 1;
    ++done;
    if (options.checkpoint_path && options.checkpoint_every > 0 &&
        state.next_iteration % options.checkpoint_every == 0) {
      write_checkpoint(*options.checkpoint_path, state);
    }
  }

  result.log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (state.best) {
    result.best = *state.best;
    result.best_report = state.best_report;
  }
  result.final_state = std::move(state);
  return result;
}

TrainResult train(const NesConfig& config, const TrainOptions& options) {
  return resume(initial_state(config), options);
}

}  // namespace nescodes
