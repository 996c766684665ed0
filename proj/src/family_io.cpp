#include "nescodes/family_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace nescodes {

namespace {

std::uint64_t parse_u64(const std::string& text, const char* field) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw SequenceError(std::string("family header: bad value for ") + field + ": '" + text + "'");
  }
  return value;
}

}  // namespace

std::string format_family(const FamilyFile& file) {
  if (file.generator.empty() ||
      file.generator.find_first_of(" \t\n\r") != std::string::npos) {
    throw SequenceError("generator name must be a non-empty token without whitespace");
  }
  std::ostringstream out;
  out << "# length=" << file.family.length() << " count=" << file.family.count()
      << " seed=" << file.seed << " generator=" << file.generator << '\n';
  for (const auto& code : file.family.codes()) out << code.to_string() << '\n';
  return out.str();
}

FamilyFile parse_family(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0) {
    throw SequenceError("family file: missing '# ' header line");
  }
  std::map<std::string, std::string> fields;
  std::istringstream hs(header.substr(2));
  std::string token;
  while (hs >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) throw SequenceError("family header: malformed field '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  for (const char* key : {"length", "count", "seed", "generator"}) {
    if (!fields.count(key)) throw SequenceError(std::string("family header: missing ") + key);
  }
  const auto length = parse_u64(fields["length"], "length");
  const auto count = parse_u64(fields["count"], "count");

  std::vector<BitSequence> codes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto seq = BitSequence::from_string(line);
    if (seq.length() != length) {
      throw SequenceError("family file: code " + std::to_string(codes.size()) + " has length " +
                          std::to_string(seq.length()) + ", header says " + std::to_string(length));
    }
    codes.push_back(std::move(seq));
  }
  if (codes.size() != count) {
    throw SequenceError("family file: header count " + std::to_string(count) + " but " +
                        std::to_string(codes.size()) + " codes present");
  }
  return FamilyFile{CodeFamily(std::move(codes)), parse_u64(fields["seed"], "seed"),
                    fields["generator"]};
}

FamilyFile parse_family(const std::string& text) {
  std::istringstream in(text);
  return parse_family(in);
}

void write_family(const std::filesystem::path& path, const FamilyFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_family(file);
}

FamilyFile read_family(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_family(in);
}

}  // namespace nescodes
