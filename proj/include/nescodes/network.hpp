#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace nescodes {

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fully connected tanh network mapping a fixed all-ones input of size K*l to
/// the proposal mean in (-1, 1)^(K*l).
struct NetworkConfig {
  std::size_t count = 0;   // K
  std::size_t length = 0;  // l
  std::size_t num_hidden = 2;
  std::size_t hidden_factor = 2;  // hidden width = hidden_factor * K * l
  double mu_lower = -1.0;         // tanh output range
  double mu_upper = 1.0;
  double output_init_gain = 0.5;  // output layer init bound = gain / sqrt(fan_in)

  static NetworkConfig for_family(std::size_t count, std::size_t length);

  std::size_t output_dim() const { return count * length; }
  std::size_t input_dim() const { return output_dim(); }
  std::size_t hidden_size() const { return hidden_factor * output_dim(); }
  /// Layer widths from input to output.
  std::vector<std::size_t> layer_sizes() const;
  std::size_t parameter_count() const;
  double threshold() const { return 0.5 * (mu_lower + mu_upper); }
  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t step = 0;
};

/// All weights and biases plus the fixed proposal variance and optimizer state.
/// theta holds, per layer, the column-major (out x in) weight matrix then the bias.
struct ProposalParams {
  NetworkConfig config;
  Eigen::VectorXd theta;
  double sigma2 = 0.1;
  AdamState adam;
};

/// Uniform init in [-a, a] with a = 1/sqrt(fan_in), scaled by output_init_gain on
/// the output layer. Deterministic for a fixed seed.
ProposalParams init_network(const NetworkConfig& config, double sigma2, std::uint64_t seed);

/// Activations of every layer for the constant input; the last entry is mu.
struct ForwardPass {
  std::vector<Eigen::VectorXd> activations;
  const Eigen::VectorXd& mu() const { return activations.back(); }
};

ForwardPass forward_pass(const ProposalParams& params);
Eigen::VectorXd forward(const ProposalParams& params);

/// Diagonal Gaussian log-density N(mu(theta), sigma2 I) at x.
double log_prob(const ProposalParams& params, const Eigen::VectorXd& x);
double log_prob(const Eigen::VectorXd& mu, double sigma2, const Eigen::VectorXd& x);

/// Vector-Jacobian product: J(theta)^T * cotangent, where J = d mu / d theta.
Eigen::VectorXd backprop(const ProposalParams& params, const ForwardPass& pass,
                         const Eigen::VectorXd& cotangent);

/// Gradient of log p_theta(x) with respect to theta.
Eigen::VectorXd grad_log_prob(const ProposalParams& params, const Eigen::VectorXd& x);

/// theta <- theta - lr * mhat / (sqrt(vhat) + eps). Throws on a non-finite gradient.
void adam_step(ProposalParams& params, const Eigen::VectorXd& grad, double lr);

void write_params(std::ostream& out, const ProposalParams& params);
ProposalParams read_params(std::istream& in);

}  // namespace nescodes
