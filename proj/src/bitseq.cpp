#include "nescodes/bitseq.hpp"

#include <algorithm>

namespace nescodes {

BitSequence::BitSequence(std::vector<std::uint8_t> chips) : chips_(std::move(chips)) {
  if (chips_.size() < 2) {
    throw SequenceError("sequence length must be at least 2, got " +
                        std::to_string(chips_.size()));
  }
  for (auto c : chips_) {
    if (c > 1) throw SequenceError("chip values must be 0 or 1");
  }
}

BitSequence BitSequence::from_string(std::string_view text) {
  std::vector<std::uint8_t> chips;
  chips.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      chips.push_back(static_cast<std::uint8_t>(c - '0'));
    } else {
      throw SequenceError(std::string("invalid chip character '") + c + "'");
    }
  }
  return BitSequence(std::move(chips));
}

std::uint8_t BitSequence::at(std::size_t i) const {
  if (i >= chips_.size()) throw std::out_of_range("chip index out of range");
  return chips_[i];
}

std::string BitSequence::to_string() const {
  std::string out(chips_.size(), '0');
  for (std::size_t i = 0; i < chips_.size(); ++i) out[i] = chips_[i] ? '1' : '0';
  return out;
}

std::size_t BitSequence::ones() const noexcept {
  return static_cast<std::size_t>(std::count(chips_.begin(), chips_.end(), std::uint8_t{1}));
}

std::vector<int> to_signed(const BitSequence& seq) {
  std::vector<int> out(seq.length());
  for (std::size_t i = 0; i < seq.length(); ++i) out[i] = seq.signed_at(i);
  return out;
}

namespace {

template <typename T>
BitSequence from_signed_impl(std::span<const T> values) {
  std::vector<std::uint8_t> chips(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == T(1)) {
      chips[i] = 0;
    } else if (values[i] == T(-1)) {
      chips[i] = 1;
    } else {
      throw SequenceError("signed value at index " + std::to_string(i) + " is not +1 or -1");
    }
  }
  return BitSequence(std::move(chips));
}

}  // namespace

BitSequence from_signed(std::span<const int> values) { return from_signed_impl(values); }
BitSequence from_signed(std::span<const double> values) { return from_signed_impl(values); }

BitSequence xor_sequences(const BitSequence& a, const BitSequence& b) {
  if (a.length() != b.length()) throw SequenceError("xor of sequences with different lengths");
  std::vector<std::uint8_t> chips(a.length());
  for (std::size_t i = 0; i < a.length(); ++i) chips[i] = a[i] ^ b[i];
  return BitSequence(std::move(chips));
}

BitSequence cyclic_shift(const BitSequence& seq, std::size_t shift) {
  const std::size_t n = seq.length();
  std::vector<std::uint8_t> chips(n);
  for (std::size_t i = 0; i < n; ++i) chips[i] = seq[(i + shift) % n];
  return BitSequence(std::move(chips));
}

CodeFamily::CodeFamily(std::vector<BitSequence> codes) : codes_(std::move(codes)) {
  if (codes_.empty()) throw SequenceError("code family must contain at least one code");
  const auto len = codes_.front().length();
  for (const auto& c : codes_) {
    if (c.length() != len) throw SequenceError("code family members differ in length");
  }
}

CodeFamily CodeFamily::from_flat(std::span<const std::uint8_t> bits, std::size_t count,
                                 std::size_t length) {
  if (bits.size() != count * length) {
    throw SequenceError("flat bit vector size does not match count * length");
  }
  std::vector<BitSequence> codes;
  codes.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto row = bits.subspan(k * length, length);
    codes.emplace_back(std::vector<std::uint8_t>(row.begin(), row.end()));
  }
  return CodeFamily(std::move(codes));
}

std::vector<std::uint8_t> CodeFamily::flatten() const {
  std::vector<std::uint8_t> out;
  out.reserve(count() * length());
  for (const auto& c : codes_) out.insert(out.end(), c.chips().begin(), c.chips().end());
  return out;
}

}  // namespace nescodes
