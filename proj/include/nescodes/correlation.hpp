#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nescodes/bitseq.hpp"

namespace nescodes {

/// Normalized correlation values indexed by delay 0..length-1.
struct CorrelationSpectrum {
  std::vector<double> values;
};

/// Family-level objective: mean-square non-central auto-correlation,
/// mean-square cross-correlation, and their maximum.
struct ObjectiveReport {
  double f_ac = 0.0;
  double f_cc = 0.0;
  double f = 0.0;

  friend bool operator==(const ObjectiveReport&, const ObjectiveReport&) = default;
};

enum class SpectrumMethod { Auto, Naive, Fft };

/// Spectra at or above this length use the FFT path under SpectrumMethod::Auto.
inline constexpr std::size_t kFftThreshold = 256;

// Scalar kernels. Delay must satisfy 0 <= delay < length; indexing is cyclic.
// Values are (1/l) * sum_i s_a(i) * s_b(i - delay) over the signed views.
double auto_corr(const BitSequence& seq, std::size_t delay);
double cross_corr(const BitSequence& a, const BitSequence& b, std::size_t delay);

// Odd variants flip the sign of the delayed factor for i < delay.
double odd_auto_corr(const BitSequence& seq, std::size_t delay);
double odd_cross_corr(const BitSequence& a, const BitSequence& b, std::size_t delay);

// Unnormalized integer numerators for every delay.
std::vector<std::int64_t> cross_numerators_naive(const BitSequence& a, const BitSequence& b);
std::vector<std::int64_t> cross_numerators_packed(const BitSequence& a, const BitSequence& b);
std::vector<std::int64_t> cross_numerators_fft(const BitSequence& a, const BitSequence& b);

CorrelationSpectrum full_auto_spectrum(const BitSequence& seq,
                                       SpectrumMethod method = SpectrumMethod::Auto);
CorrelationSpectrum full_cross_spectrum(const BitSequence& a, const BitSequence& b,
                                        SpectrumMethod method = SpectrumMethod::Auto);

/// Requires at least two codes; the cross term is undefined otherwise.
ObjectiveReport evaluate_family(const CodeFamily& family);

/// Same objective on a flat row-major K*length bit vector.
ObjectiveReport evaluate_bits(std::span<const std::uint8_t> bits, std::size_t count,
                              std::size_t length);

/// sqrt((K-1)/(K*l-1)), used as a reference line in reports.
double welch_bound(std::size_t count, std::size_t length);

}  // namespace nescodes
