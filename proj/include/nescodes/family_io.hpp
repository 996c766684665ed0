#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "nescodes/bitseq.hpp"

namespace nescodes {

/// A code family plus the provenance carried in its text header.
///
/// Text layout:
///   # length=<l> count=<K> seed=<u64> generator=<name>
///   0110...   (one code per line)
struct FamilyFile {
  CodeFamily family;
  std::uint64_t seed = 0;
  std::string generator;

  friend bool operator==(const FamilyFile&, const FamilyFile&) = default;
};

std::string format_family(const FamilyFile& file);
FamilyFile parse_family(std::istream& in);
FamilyFile parse_family(const std::string& text);

void write_family(const std::filesystem::path& path, const FamilyFile& file);
FamilyFile read_family(const std::filesystem::path& path);

}  // namespace nescodes
