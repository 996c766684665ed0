#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nescodes/bitseq.hpp"
#include "nescodes/correlation.hpp"

namespace nescodes {

/// Fibonacci LFSR. Stage 1 receives the XOR of the tapped stages and the
/// output is taken from stage `degree`, so taps {t...} realize the
/// characteristic polynomial 1 + sum x^t. GPS L1 C/A G1 is {3, 10}.
struct LfsrSpec {
  unsigned degree = 0;
  std::vector<unsigned> taps;  // 1-indexed, must contain degree
  std::uint32_t seed = 0;      // stage i holds bit (i-1); 0 means all-ones

  std::string polynomial() const;
};

/// Validated LfsrSpec with an all-ones seed.
LfsrSpec make_lfsr(unsigned degree, std::vector<unsigned> taps, std::uint32_t seed = 0);

/// Length 2^n - 1 output. Throws if the taps do not yield a maximal period.
BitSequence lfsr_sequence(const LfsrSpec& spec);

/// Shipped primitive polynomials (one per degree 2..16).
LfsrSpec primitive_lfsr(unsigned degree);

struct GoldFamilySpec {
  LfsrSpec g1;
  LfsrSpec g2;

  std::size_t length() const { return (std::size_t{1} << g1.degree) - 1; }
  std::size_t family_size() const { return (std::size_t{1} << g1.degree) + 1; }
  std::string describe() const;
};

/// Preferred-pair table rows: "<degree> <taps_g1> <taps_g2>" with comma-separated taps.
/// '#' starts a comment. Each row is checked for the three-valued cross-correlation
/// property on load.
std::vector<GoldFamilySpec> parse_preferred_pairs(std::istream& in);
std::vector<GoldFamilySpec> load_preferred_pairs(const std::filesystem::path& path);

/// Built-in preferred pairs for n in {5, 6, 7, 9, 10}. n = 10 is the GPS C/A pair.
GoldFamilySpec preferred_pair(unsigned degree);

/// t = 2^floor((n+2)/2) + 1; off-peak numerators are -t, -1, t-2.
std::int64_t gold_t(unsigned degree);

/// [u, v, u ^ shift(v, 0), ..., u ^ shift(v, 2^n - 2)]
CodeFamily gold_family(const GoldFamilySpec& spec);

bool is_prime(std::uint64_t n);

/// chip(i) = 1 iff i is a nonzero quadratic residue mod p; chip(0) = 0.
BitSequence legendre_sequence(std::uint64_t p);

struct WeilFamilySpec {
  std::uint64_t prime = 0;
  std::size_t family_size() const { return static_cast<std::size_t>((prime - 1) / 2); }
};

/// Member w (w = 1..(p-1)/2) is legendre ^ shift(legendre, w).
CodeFamily weil_family(const WeilFamilySpec& spec);

/// Uniform K-subset without replacement, in draw order.
CodeFamily sample_subset(const CodeFamily& full, std::size_t count, std::uint64_t seed);

struct BestOfOptions {
  std::size_t num_samples = 10000;
  bool balance_resampling = false;
  double deviation_threshold = 0.2;  // relative |f_ac - f_cc| / max(f_ac, f_cc)
  std::size_t retry_budget = 10;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
};

struct BestOfResult {
  CodeFamily family;
  ObjectiveReport report;
  std::size_t sample_index = 0;
  std::vector<double> sampled_f;  // objective of every accepted draw, by sample index
};

/// Subset with minimal f over num_samples draws. Draw i uses the stream
/// (master_seed, i), so results do not depend on the worker count.
BestOfResult best_of_samples(const CodeFamily& full, std::size_t count,
                             const BestOfOptions& options);

double relative_deviation(const ObjectiveReport& report);

}  // namespace nescodes
