#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nescodes {

/// Error raised for contract violations on sequence and family values.
class SequenceError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// One binary spreading code.
///
/// Chips are stored in (0,1) form. The signed view maps 0 -> +1 and
/// 1 -> -1, so XOR of chips becomes multiplication of signed values.
class BitSequence {
public:
  BitSequence() = default;
  explicit BitSequence(std::vector<std::uint8_t> chips);

  /// Parses a contiguous string of '0'/'1' characters.
  static BitSequence from_string(std::string_view text);

  std::size_t length() const noexcept { return chips_.size(); }
  std::uint8_t operator[](std::size_t i) const noexcept { return chips_[i]; }
  std::uint8_t at(std::size_t i) const;
  std::span<const std::uint8_t> chips() const noexcept { return chips_; }

  int signed_at(std::size_t i) const noexcept { return chips_[i] ? -1 : 1; }

  std::string to_string() const;
  std::size_t ones() const noexcept;

  friend bool operator==(const BitSequence&, const BitSequence&) = default;

private:
  std::vector<std::uint8_t> chips_;
};

std::vector<int> to_signed(const BitSequence& seq);
BitSequence from_signed(std::span<const int> values);
BitSequence from_signed(std::span<const double> values);

/// Element-wise XOR of two equal-length sequences.
BitSequence xor_sequences(const BitSequence& a, const BitSequence& b);

/// Result chip i is seq[(i + shift) mod length].
BitSequence cyclic_shift(const BitSequence& seq, std::size_t shift);

/// Ordered set of equal-length codes.
class CodeFamily {
public:
  CodeFamily() = default;
  explicit CodeFamily(std::vector<BitSequence> codes);

  /// Reshapes a flat K*length bit vector row-wise into K codes.
  static CodeFamily from_flat(std::span<const std::uint8_t> bits, std::size_t count,
                              std::size_t length);

  std::size_t count() const noexcept { return codes_.size(); }
  std::size_t length() const noexcept { return codes_.empty() ? 0 : codes_.front().length(); }
  std::size_t pair_count() const noexcept { return count() * (count() - 1) / 2; }

  const BitSequence& operator[](std::size_t k) const noexcept { return codes_[k]; }
  const std::vector<BitSequence>& codes() const noexcept { return codes_; }

  std::vector<std::uint8_t> flatten() const;

  friend bool operator==(const CodeFamily&, const CodeFamily&) = default;

private:
  std::vector<BitSequence> codes_;
};

}  // namespace nescodes
