#include "nescodes/correlation.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace nescodes {

namespace {

void check_delay(std::size_t length, std::size_t delay) {
  if (delay >= length) {
    throw std::out_of_range("delay " + std::to_string(delay) + " outside [0, " +
                            std::to_string(length) + ")");
  }
}

void check_same_length(const BitSequence& a, const BitSequence& b) {
  if (a.length() != b.length()) {
    throw SequenceError("correlation of sequences with different lengths (" +
                        std::to_string(a.length()) + " vs " + std::to_string(b.length()) + ")");
  }
}

std::int64_t numerator(const BitSequence& a, const BitSequence& b, std::size_t delay, bool odd) {
  const std::size_t n = a.length();
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int term = a.signed_at(i) * b.signed_at((i + n - delay) % n);
    if (odd && i < delay) term = -term;
    sum += term;
  }
  return sum;
}

// Packed chips of one code, stored twice back to back so that any cyclic
// rotation can be read as a contiguous bit window.
class PackedCode {
public:
  PackedCode(std::span<const std::uint8_t> chips) : length_(chips.size()) {
    words_ = (length_ + 63) / 64;
    doubled_.assign((2 * length_ + 63) / 64 + 2, 0);
    for (std::size_t i = 0; i < 2 * length_; ++i) {
      if (chips[i % length_]) doubled_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
    tail_mask_ = (length_ % 64 == 0) ? ~std::uint64_t{0}
                                     : (std::uint64_t{1} << (length_ % 64)) - 1;
  }

  std::size_t words() const { return words_; }

  // Word w of the length_-bit window starting at bit offset.
  std::uint64_t window(std::size_t offset, std::size_t w) const {
    const std::size_t q = (offset >> 6) + w;
    const unsigned r = offset & 63;
    std::uint64_t v = r == 0 ? doubled_[q] : (doubled_[q] >> r) | (doubled_[q + 1] << (64 - r));
    return w + 1 == words_ ? v & tail_mask_ : v;
  }

  // sum_i s_self(i) * s_other(i - delay)
  std::int64_t cross(const PackedCode& other, std::size_t delay) const {
    const std::size_t offset = (length_ - delay) % length_;
    std::int64_t mismatches = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      mismatches += std::popcount(window(0, w) ^ other.window(offset, w));
    }
    return static_cast<std::int64_t>(length_) - 2 * mismatches;
  }

private:
  std::size_t length_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> doubled_;
  std::uint64_t tail_mask_ = 0;
};

// FFTW planning is not thread-safe; executing an existing plan on new arrays is.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

FftPlans plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const std::size_t bins = n / 2 + 1;
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(bins);
  FftPlans p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(spec);
  cache.emplace(n, p);
  return p;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

double auto_corr(const BitSequence& seq, std::size_t delay) {
  return cross_corr(seq, seq, delay);
}

double cross_corr(const BitSequence& a, const BitSequence& b, std::size_t delay) {
  check_same_length(a, b);
  check_delay(a.length(), delay);
  return static_cast<double>(numerator(a, b, delay, false)) / static_cast<double>(a.length());
}

double odd_auto_corr(const BitSequence& seq, std::size_t delay) {
  return odd_cross_corr(seq, seq, delay);
}

double odd_cross_corr(const BitSequence& a, const BitSequence& b, std::size_t delay) {
  check_same_length(a, b);
  check_delay(a.length(), delay);
  return static_cast<double>(numerator(a, b, delay, true)) / static_cast<double>(a.length());
}

std::vector<std::int64_t> cross_numerators_naive(const BitSequence& a, const BitSequence& b) {
  check_same_length(a, b);
  std::vector<std::int64_t> out(a.length());
  for (std::size_t d = 0; d < a.length(); ++d) out[d] = numerator(a, b, d, false);
  return out;
}

std::vector<std::int64_t> cross_numerators_packed(const BitSequence& a, const BitSequence& b) {
  check_same_length(a, b);
  PackedCode pa(a.chips()), pb(b.chips());
  std::vector<std::int64_t> out(a.length());
  for (std::size_t d = 0; d < a.length(); ++d) out[d] = pa.cross(pb, d);
  return out;
}

std::vector<std::int64_t> cross_numerators_fft(const BitSequence& a, const BitSequence& b) {
  check_same_length(a, b);
  const std::size_t n = a.length();
  const std::size_t bins = n / 2 + 1;
  const auto plans = plans_for(n);

  std::unique_ptr<double, FftwDeleter> ra(fftw_alloc_real(n)), rb(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwDeleter> fa(fftw_alloc_complex(bins)),
      fb(fftw_alloc_complex(bins));
  for (std::size_t i = 0; i < n; ++i) {
    ra.get()[i] = a.signed_at(i);
    rb.get()[i] = b.signed_at(i);
  }
  fftw_execute_dft_r2c(plans.forward, ra.get(), fa.get());
  fftw_execute_dft_r2c(plans.forward, rb.get(), fb.get());
  // sum_i a(i) b(i - d)  <->  A(k) * conj(B(k))
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = fa.get()[k][0] * fb.get()[k][0] + fa.get()[k][1] * fb.get()[k][1];
    const double im = fa.get()[k][1] * fb.get()[k][0] - fa.get()[k][0] * fb.get()[k][1];
    fa.get()[k][0] = re;
    fa.get()[k][1] = im;
  }
  fftw_execute_dft_c2r(plans.backward, fa.get(), ra.get());

  std::vector<std::int64_t> out(n);
  for (std::size_t d = 0; d < n; ++d) {
    out[d] = std::llround(ra.get()[d] / static_cast<double>(n));
  }
  return out;
}

CorrelationSpectrum full_cross_spectrum(const BitSequence& a, const BitSequence& b,
                                        SpectrumMethod method) {
  check_same_length(a, b);
  const std::size_t n = a.length();
  if (method == SpectrumMethod::Auto) {
    method = n >= kFftThreshold ? SpectrumMethod::Fft : SpectrumMethod::Naive;
  }
  const auto nums =
      method == SpectrumMethod::Fft ? cross_numerators_fft(a, b) : cross_numerators_naive(a, b);
  CorrelationSpectrum spectrum;
  spectrum.values.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    spectrum.values[d] = static_cast<double>(nums[d]) / static_cast<double>(n);
  }
  return spectrum;
}

CorrelationSpectrum full_auto_spectrum(const BitSequence& seq, SpectrumMethod method) {
  return full_cross_spectrum(seq, seq, method);
}

ObjectiveReport evaluate_bits(std::span<const std::uint8_t> bits, std::size_t count,
                              std::size_t length) {
  if (count < 2) throw SequenceError("evaluate_family needs at least 2 codes");
  if (length < 2) throw SequenceError("evaluate_family needs code length of at least 2");
  if (bits.size() != count * length) throw SequenceError("bit vector size mismatch");

  std::vector<PackedCode> packed;
  packed.reserve(count);
  for (std::size_t k = 0; k < count; ++k) packed.emplace_back(bits.subspan(k * length, length));

  std::int64_t auto_sum = 0;
  std::int64_t cross_sum = 0;
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t d = 1; d < length; ++d) {  // non-central: skip the peak
      const auto c = packed[k].cross(packed[k], d);
      auto_sum += c * c;
    }
    for (std::size_t j = k + 1; j < count; ++j) {
      for (std::size_t d = 0; d < length; ++d) {
        const auto c = packed[k].cross(packed[j], d);
        cross_sum += c * c;
      }
    }
  }

  const double l = static_cast<double>(length);
  const double l3 = l * l * l;
  const double pairs = static_cast<double>(count * (count - 1) / 2);
  ObjectiveReport report;
  report.f_ac = static_cast<double>(auto_sum) / (static_cast<double>(count) * l3);
  report.f_cc = static_cast<double>(cross_sum) / (pairs * l3);
  report.f = std::max(report.f_ac, report.f_cc);
  return report;
}

ObjectiveReport evaluate_family(const CodeFamily& family) {
  const auto flat = family.flatten();
  return evaluate_bits(flat, family.count(), family.length());
}

double welch_bound(std::size_t count, std::size_t length) {
  if (count < 2 || length < 2) throw SequenceError("welch_bound needs K >= 2 and length >= 2");
  const double k = static_cast<double>(count);
  return std::sqrt((k - 1.0) / (k * static_cast<double>(length) - 1.0));
}

}  // namespace nescodes
