#include "nescodes/classical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nescodes/parallel.hpp"
#include "nescodes/rng.hpp"

namespace nescodes {

std::string LfsrSpec::polynomial() const {
  auto sorted = taps;
  std::sort(sorted.rbegin(), sorted.rend());
  std::string out;
  for (auto t : sorted) out += (t == 1 ? "x" : "x^" + std::to_string(t)) + " + ";
  return out + "1";
}

LfsrSpec make_lfsr(unsigned degree, std::vector<unsigned> taps, std::uint32_t seed) {
  if (degree < 2 || degree > 16) {
    throw SequenceError("LFSR degree must be in [2, 16], got " + std::to_string(degree));
  }
  std::sort(taps.begin(), taps.end());
  taps.erase(std::unique(taps.begin(), taps.end()), taps.end());
  if (taps.empty() || taps.front() < 1 || taps.back() != degree) {
    throw SequenceError("LFSR taps must lie in [1, n] and include n");
  }
  const std::uint32_t full = (std::uint32_t{1} << degree) - 1;
  if (seed == 0) seed = full;
  if ((seed & full) != seed) throw SequenceError("LFSR seed has bits beyond the register");
  return LfsrSpec{degree, std::move(taps), seed};
}

BitSequence lfsr_sequence(const LfsrSpec& spec) {
  if (spec.degree < 2 || spec.degree > 16) throw SequenceError("LFSR degree must be in [2, 16]");
  if (spec.seed == 0) throw SequenceError("LFSR seed must be nonzero (zero state is a fixed point)");
  if (spec.taps.empty() ||
      std::find(spec.taps.begin(), spec.taps.end(), spec.degree) == spec.taps.end()) {
    throw SequenceError("LFSR taps must include the degree");
  }
  std::uint32_t mask = 0;
  for (auto t : spec.taps) {
    if (t < 1 || t > spec.degree) throw SequenceError("LFSR tap outside [1, n]");
    mask |= std::uint32_t{1} << (t - 1);
  }

  const std::size_t period = (std::size_t{1} << spec.degree) - 1;
  std::vector<std::uint8_t> chips(period);
  std::uint32_t state = spec.seed;
  const std::uint32_t full = static_cast<std::uint32_t>(period);
  for (std::size_t k = 0; k < period; ++k) {
    chips[k] = static_cast<std::uint8_t>((state >> (spec.degree - 1)) & 1u);
    const auto feedback = static_cast<std::uint32_t>(std::popcount(state & mask) & 1);
    state = ((state << 1) | feedback) & full;
    if (state == spec.seed && k + 1 < period) {
      throw SequenceError("polynomial " + spec.polynomial() + " is not primitive (period " +
                          std::to_string(k + 1) + " < " + std::to_string(period) + ")");
    }
  }
  if (state != spec.seed) {
    throw SequenceError("polynomial " + spec.polynomial() + " is not primitive");
  }
  return BitSequence(std::move(chips));
}

LfsrSpec primitive_lfsr(unsigned degree) {
  static const std::vector<std::vector<unsigned>> table = {
      {},           {},          {2, 1},       {3, 2},        {4, 3},      {5, 3},
      {6, 5},       {7, 6},      {8, 6, 5, 4}, {9, 5},        {10, 7},     {11, 9},
      {12, 6, 4, 1}, {13, 4, 3, 1}, {14, 5, 3, 1}, {15, 14}, {16, 15, 13, 4}};
  if (degree < 2 || degree >= table.size()) {
    throw SequenceError("no shipped primitive polynomial for degree " + std::to_string(degree));
  }
  return make_lfsr(degree, table[degree]);
}

std::string GoldFamilySpec::describe() const {
  return "gold(n=" + std::to_string(g1.degree) + "; g1=" + g1.polynomial() +
         "; g2=" + g2.polynomial() + ")";
}

std::int64_t gold_t(unsigned degree) {
  return (std::int64_t{1} << ((degree + 2) / 2)) + 1;
}

namespace {

void validate_gold_spec(const GoldFamilySpec& spec) {
  if (spec.g1.degree != spec.g2.degree) {
    throw SequenceError("Gold registers must share the same degree");
  }
  if (spec.g1.degree % 4 == 0) {
    throw SequenceError("no preferred pairs exist for n divisible by 4 (n=" +
                        std::to_string(spec.g1.degree) + ")");
  }
}

void check_three_valued(const GoldFamilySpec& spec) {
  const auto u = lfsr_sequence(spec.g1);
  const auto v = lfsr_sequence(spec.g2);
  const auto t = gold_t(spec.g1.degree);
  for (auto c : cross_numerators_packed(u, v)) {
    if (c != -t && c != -1 && c != t - 2) {
      throw SequenceError("pair " + spec.describe() +
                          " is not preferred: cross-correlation numerator " + std::to_string(c));
    }
  }
}

std::vector<unsigned> parse_taps(const std::string& field) {
  std::vector<unsigned> taps;
  std::istringstream in(field);
  std::string item;
  while (std::getline(in, item, ',')) taps.push_back(static_cast<unsigned>(std::stoul(item)));
  return taps;
}

}  // namespace

std::vector<GoldFamilySpec> parse_preferred_pairs(std::istream& in) {
  std::vector<GoldFamilySpec> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    unsigned degree = 0;
    std::string g1, g2;
    if (!(row >> degree)) continue;
    if (!(row >> g1 >> g2)) throw SequenceError("tap table: malformed row '" + line + "'");
    GoldFamilySpec spec{make_lfsr(degree, parse_taps(g1)), make_lfsr(degree, parse_taps(g2))};
    validate_gold_spec(spec);
    check_three_valued(spec);
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<GoldFamilySpec> load_preferred_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tap table " + path.string());
  return parse_preferred_pairs(in);
}

GoldFamilySpec preferred_pair(unsigned degree) {
  static const char* table =
      "5  2,5    2,3,4,5\n"
      "6  1,6    1,2,5,6\n"
      "7  3,7    1,2,3,7\n"
      "9  4,9    3,4,6,9\n"
      "10 3,10   2,3,6,8,9,10\n";
  std::istringstream in(table);
  for (auto& spec : parse_preferred_pairs(in)) {
    if (spec.g1.degree == degree) return spec;
  }
  throw SequenceError("no shipped preferred pair for n=" + std::to_string(degree));
}

CodeFamily gold_family(const GoldFamilySpec& spec) {
  validate_gold_spec(spec);
  const auto u = lfsr_sequence(spec.g1);
  const auto v = lfsr_sequence(spec.g2);
  std::vector<BitSequence> codes{u, v};
  codes.reserve(spec.family_size());
  for (std::size_t d = 0; d < u.length(); ++d) codes.push_back(xor_sequences(u, cyclic_shift(v, d)));
  return CodeFamily(std::move(codes));
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

BitSequence legendre_sequence(std::uint64_t p) {
  if (p < 3 || !is_prime(p)) {
    throw SequenceError("Legendre sequence needs an odd prime length, got " + std::to_string(p));
  }
  std::vector<std::uint8_t> chips(p, 0);
  for (std::uint64_t k = 1; k < p; ++k) chips[(k * k) % p] = 1;
  return BitSequence(std::move(chips));
}

CodeFamily weil_family(const WeilFamilySpec& spec) {
  const auto legendre = legendre_sequence(spec.prime);
  std::vector<BitSequence> codes;
  codes.reserve(spec.family_size());
  for (std::size_t w = 1; w <= spec.family_size(); ++w) {
    codes.push_back(xor_sequences(legendre, cyclic_shift(legendre, w)));
  }
  return CodeFamily(std::move(codes));
}

namespace {

CodeFamily draw_subset(const CodeFamily& full, std::size_t count, RandomEngine& rng) {
  std::vector<std::size_t> index(full.count());
  std::iota(index.begin(), index.end(), 0);
  std::vector<BitSequence> codes;
  codes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, index.size() - 1);
    std::swap(index[i], index[pick(rng)]);
    codes.push_back(full[index[i]]);
  }
  return CodeFamily(std::move(codes));
}

}  // namespace

CodeFamily sample_subset(const CodeFamily& full, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count > full.count()) {
    throw SequenceError("subset size " + std::to_string(count) + " not in [1, " +
                        std::to_string(full.count()) + "]");
  }
  RandomEngine rng(seed);
  return draw_subset(full, count, rng);
}

double relative_deviation(const ObjectiveReport& report) {
  const double hi = std::max(report.f_ac, report.f_cc);
  return hi > 0.0 ? std::abs(report.f_ac - report.f_cc) / hi : 0.0;
}

BestOfResult best_of_samples(const CodeFamily& full, std::size_t count,
                             const BestOfOptions& options) {
  if (options.num_samples < 1) throw SequenceError("best_of_samples needs num_samples >= 1");
  if (count < 2 || count > full.count()) {
    throw SequenceError("subset size " + std::to_string(count) + " not in [2, " +
                        std::to_string(full.count()) + "]");
  }

  struct Draw {
    CodeFamily family;
    ObjectiveReport report;
  };
  std::vector<Draw> draws(options.num_samples);
  parallel_for(options.num_samples, options.workers, [&](std::size_t i) {
    auto rng = make_stream(options.master_seed, {i});
    auto family = draw_subset(full, count, rng);
    auto report = evaluate_family(family);
    if (options.balance_resampling) {
      // Redraw lopsided subsets; keep the least lopsided one if the budget runs out.
      Draw kept{family, report};
      for (std::size_t retry = 0;
           retry < options.retry_budget && relative_deviation(kept.report) > options.deviation_threshold;
           ++retry) {
        auto candidate = draw_subset(full, count, rng);
        auto candidate_report = evaluate_family(candidate);
        if (relative_deviation(candidate_report) < relative_deviation(kept.report)) {
          kept = Draw{std::move(candidate), candidate_report};
        }
      }
      draws[i] = std::move(kept);
    } else {
      draws[i] = Draw{std::move(family), report};
    }
  });

  BestOfResult result;
  result.sampled_f.reserve(draws.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    result.sampled_f.push_back(draws[i].report.f);
    if (draws[i].report.f < draws[best].report.f) best = i;
  }
  result.family = draws[best].family;
  result.report = draws[best].report;
  result.sample_index = best;
  return result;
}

}  // namespace nescodes
