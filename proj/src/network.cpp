#include "nescodes/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "nescodes/rng.hpp"

namespace nescodes {

namespace {

using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using MatrixMap = Eigen::Map<Eigen::MatrixXd>;

// Largest double strictly below 1.
constexpr double kOpenBound = 1.0 - 0x1.0p-53;

}  // namespace

NetworkConfig NetworkConfig::for_family(std::size_t count, std::size_t length) {
  NetworkConfig cfg;
  cfg.count = count;
  cfg.length = length;
  cfg.validate();
  return cfg;
}

std::vector<std::size_t> NetworkConfig::layer_sizes() const {
  std::vector<std::size_t> sizes{input_dim()};
  for (std::size_t i = 0; i < num_hidden; ++i) sizes.push_back(hidden_size());
  sizes.push_back(output_dim());
  return sizes;
}

std::size_t NetworkConfig::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t total = 0;
  for (std::size_t i = 1; i < sizes.size(); ++i) total += sizes[i] * sizes[i - 1] + sizes[i];
  return total;
}

void NetworkConfig::validate() const {
  if (count < 1 || length < 2) throw std::invalid_argument("network needs K >= 1 and length >= 2");
  if (hidden_factor < 1) throw std::invalid_argument("hidden_factor must be positive");
  if (!(std::isfinite(mu_lower) && std::isfinite(mu_upper) && mu_lower < mu_upper)) {
    throw std::invalid_argument("output bounds must be finite with mu_lower < mu_upper");
  }
  if (mu_lower != -1.0 || mu_upper != 1.0) {
    throw std::invalid_argument("tanh output layer requires bounds [-1, 1]");
  }
}

ProposalParams init_network(const NetworkConfig& config, double sigma2, std::uint64_t seed) {
  config.validate();
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("proposal variance must be positive and finite");
  }
  ProposalParams params;
  params.config = config;
  params.sigma2 = sigma2;
  params.theta.resize(static_cast<Eigen::Index>(config.parameter_count()));

  RandomEngine rng(seed);
  const auto sizes = config.layer_sizes();
  Eigen::Index offset = 0;
  for (std::size_t layer = 1; layer < sizes.size(); ++layer) {
    const auto fan_in = static_cast<double>(sizes[layer - 1]);
    double bound = 1.0 / std::sqrt(fan_in);
    if (layer + 1 == sizes.size()) bound *= config.output_init_gain;
    std::uniform_real_distribution<double> dist(-bound, bound);
    const auto n = static_cast<Eigen::Index>(sizes[layer] * sizes[layer - 1] + sizes[layer]);
    for (Eigen::Index i = 0; i < n; ++i) params.theta[offset + i] = dist(rng);
    offset += n;
  }
  params.adam.m = Eigen::VectorXd::Zero(params.theta.size());
  params.adam.v = Eigen::VectorXd::Zero(params.theta.size());
  return params;
}

ForwardPass forward_pass(const ProposalParams& params) {
  if (!params.theta.allFinite()) throw NumericalError("network parameters contain NaN or Inf");
  const auto sizes = params.config.layer_sizes();
  if (params.theta.size() != static_cast<Eigen::Index>(params.config.parameter_count())) {
    throw std::invalid_argument("parameter vector does not match the network shape");
  }
  ForwardPass pass;
  pass.activations.reserve(sizes.size());
  pass.activations.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sizes[0])));

  const double* data = params.theta.data();
  for (std::size_t layer = 1; layer < sizes.size(); ++layer) {
    const auto rows = static_cast<Eigen::Index>(sizes[layer]);
    const auto cols = static_cast<Eigen::Index>(sizes[layer - 1]);
    ConstMatrixMap weights(data, rows, cols);
    Eigen::Map<const Eigen::VectorXd> bias(data + rows * cols, rows);
    Eigen::VectorXd z = bias;
    z.noalias() += weights * pass.activations.back();
    pass.activations.push_back(z.array().tanh().matrix());
    data += rows * cols + rows;
  }
  // tanh rounds to +-1 for |z| > ~19; keep the mean strictly inside the bounds.
  auto& mu = pass.activations.back();
  mu = mu.cwiseMax(-kOpenBound).cwiseMin(kOpenBound);
  return pass;
}

Eigen::VectorXd forward(const ProposalParams& params) { return forward_pass(params).mu(); }

double log_prob(const Eigen::VectorXd& mu, double sigma2, const Eigen::VectorXd& x) {
  if (x.size() != mu.size()) {
    throw std::invalid_argument("log_prob: sample has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(mu.size()));
  }
  const double n = static_cast<double>(x.size());
  return -(x - mu).squaredNorm() / (2.0 * sigma2) -
         0.5 * n * std::log(2.0 * std::numbers::pi * sigma2);
}

double log_prob(const ProposalParams& params, const Eigen::VectorXd& x) {
  return log_prob(forward(params), params.sigma2, x);
}

Eigen::VectorXd backprop(const ProposalParams& params, const ForwardPass& pass,
                         const Eigen::VectorXd& cotangent) {
  const auto sizes = params.config.layer_sizes();
  if (cotangent.size() != static_cast<Eigen::Index>(sizes.back())) {
    throw std::invalid_argument("backprop: cotangent dimension mismatch");
  }
  Eigen::VectorXd grad(params.theta.size());

  // Walk layers from the output back to the input; offsets are computed from the end.
  Eigen::Index end = params.theta.size();
  Eigen::VectorXd upstream = cotangent;  // d/d(activation of current layer)
  for (std::size_t layer = sizes.size() - 1; layer >= 1; --layer) {
    const auto rows = static_cast<Eigen::Index>(sizes[layer]);
    const auto cols = static_cast<Eigen::Index>(sizes[layer - 1]);
    const Eigen::Index begin = end - (rows * cols + rows);
    const auto& out = pass.activations[layer];
    const auto& in = pass.activations[layer - 1];

    Eigen::VectorXd dz = upstream.array() * (1.0 - out.array().square());
    MatrixMap grad_w(grad.data() + begin, rows, cols);
    grad_w.noalias() = dz * in.transpose();
    grad.segment(begin + rows * cols, rows) = dz;

    if (layer > 1) {
      ConstMatrixMap weights(params.theta.data() + begin, rows, cols);
      upstream.noalias() = weights.transpose() * dz;
    }
    end = begin;
  }
  return grad;
}

Eigen::VectorXd grad_log_prob(const ProposalParams& params, const Eigen::VectorXd& x) {
  const auto pass = forward_pass(params);
  if (x.size() != pass.mu().size()) throw std::invalid_argument("grad_log_prob: dimension mismatch");
  return backprop(params, pass, (x - pass.mu()) / params.sigma2);
}

void adam_step(ProposalParams& params, const Eigen::VectorXd& grad, double lr) {
  if (grad.size() != params.theta.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
  if (!grad.allFinite()) throw NumericalError("adam_step: gradient contains NaN or Inf");

  // Work on copies so a failed step leaves params untouched.
  AdamState s = params.adam;
  s.step += 1;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  Eigen::VectorXd theta =
      (params.theta.array() - lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + s.epsilon))
          .matrix();
  if (!theta.allFinite()) throw NumericalError("adam_step: parameters became non-finite");
  params.theta = std::move(theta);
  params.adam = std::move(s);
}

// Binary layout (native endianness): magic, version, config fields, sigma2,
// Adam scalars, step, then theta, m, v as length-prefixed double arrays.
namespace {

constexpr char kMagic[8] = {'N', 'E', 'S', 'P', 'A', 'R', 'M', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw std::runtime_error("parameter stream truncated");
  }
  return value;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd get_vector(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw std::runtime_error("parameter stream truncated");
  }
  return v;
}

}  // namespace

void write_params(std::ostream& out, const ProposalParams& params) {
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  const auto& c = params.config;
  put<std::uint64_t>(out, c.count);
  put<std::uint64_t>(out, c.length);
  put<std::uint64_t>(out, c.num_hidden);
  put<std::uint64_t>(out, c.hidden_factor);
  put(out, c.mu_lower);
  put(out, c.mu_upper);
  put(out, c.output_init_gain);
  put(out, params.sigma2);
  put(out, params.adam.beta1);
  put(out, params.adam.beta2);
  put(out, params.adam.epsilon);
  put<std::uint64_t>(out, params.adam.step);
  put_vector(out, params.theta);
  put_vector(out, params.adam.m);
  put_vector(out, params.adam.v);
}

ProposalParams read_params(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a network parameter stream");
  }
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported parameter version");
  ProposalParams p;
  p.config.count = get<std::uint64_t>(in);
  p.config.length = get<std::uint64_t>(in);
  p.config.num_hidden = get<std::uint64_t>(in);
  p.config.hidden_factor = get<std::uint64_t>(in);
  p.config.mu_lower = get<double>(in);
  p.config.mu_upper = get<double>(in);
  p.config.output_init_gain = get<double>(in);
  p.config.validate();
  p.sigma2 = get<double>(in);
  p.adam.beta1 = get<double>(in);
  p.adam.beta2 = get<double>(in);
  p.adam.epsilon = get<double>(in);
  p.adam.step = get<std::uint64_t>(in);
  p.theta = get_vector(in);
  p.adam.m = get_vector(in);
  p.adam.v = get_vector(in);
  const auto n = static_cast<Eigen::Index>(p.config.parameter_count());
  if (p.theta.size() != n || p.adam.m.size() != n || p.adam.v.size() != n) {
    throw std::runtime_error("parameter stream shape does not match its config");
  }
  return p;
}

}  // namespace nescodes
