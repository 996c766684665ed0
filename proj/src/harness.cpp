#include "nescodes/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "nescodes/family_io.hpp"
#include "nescodes/ga.hpp"
#include "nescodes/nes.hpp"
#include "nescodes/parallel.hpp"
#include "nescodes/train_log.hpp"

namespace nescodes {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

const std::vector<std::string> kKnownGenerators = {"nes", "nes_nobaseline", "ga", "gold", "weil"};

std::optional<unsigned> mersenne_degree(std::size_t length) {
  for (unsigned n = 2; n <= 16; ++n) {
    if ((std::size_t{1} << n) - 1 == length) return n;
  }
  return std::nullopt;
}

bool has_gold(std::size_t length) {
  auto n = mersenne_degree(length);
  return n && (*n == 5 || *n == 6 || *n == 7 || *n == 9 || *n == 10);
}

std::string resolve_classical(const std::string& generator, std::size_t length) {
  if (generator != "auto") return generator;
  if (has_gold(length)) return "gold";
  if (is_prime(length)) return "weil";
  throw std::invalid_argument("no Gold or Weil family exists for length " + std::to_string(length));
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json nes_json(const NesSettings& s) {
  json j{{"sigma2", s.sigma2},
         {"batch_size", s.batch_size},
         {"num_iterations", s.num_iterations},
         {"use_baseline", s.use_baseline}};
  j["learning_rate"] = s.learning_rate ? json(*s.learning_rate) : json(nullptr);
  return j;
}

json ga_json(const GaSettings& s) {
  return json{{"population_size", s.population_size},
              {"num_iterations", s.num_iterations},
              {"elite_rate", s.elite_rate},
              {"mutation_rate", s.mutation_rate}};
}

json classical_json(const ClassicalSettings& s) {
  return json{{"generator", s.generator},
              {"num_samples", s.num_samples},
              {"balance_resampling", s.balance_resampling},
              {"deviation_threshold", s.deviation_threshold},
              {"retry_budget", s.retry_budget}};
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw std::invalid_argument("unknown field '" + it.key() + "' in " + where);
    }
  }
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "nes_train") return ExperimentKind::NesTrain;
  if (name == "ga_run") return ExperimentKind::GaRun;
  if (name == "classical_baseline") return ExperimentKind::ClassicalBaseline;
  if (name == "ablation") return ExperimentKind::Ablation;
  if (name == "sweep") return ExperimentKind::Sweep;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream row(line);
  std::string cell;
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

ProfileDefaults profile_defaults(Profile profile) {
  ProfileDefaults d;
  if (profile == Profile::Desk) {
    d.nes.batch_size = 50;
    d.nes.num_iterations = 1500;
    d.ga.population_size = 50;
    d.ga.num_iterations = 1500;
    d.classical.num_samples = 1000;
  }
  return d;
}

Profile parse_profile(const std::string& name) {
  if (name == "paper") return Profile::Paper;
  if (name == "desk") return Profile::Desk;
  throw std::invalid_argument("unknown profile '" + name + "' (expected paper or desk)");
}

std::string profile_name(Profile profile) { return profile == Profile::Paper ? "paper" : "desk"; }

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::NesTrain: return "nes_train";
    case ExperimentKind::GaRun: return "ga_run";
    case ExperimentKind::ClassicalBaseline: return "classical_baseline";
    case ExperimentKind::Ablation: return "ablation";
    case ExperimentKind::Sweep: return "sweep";
  }
  return "unknown";
}

ExperimentSpec parse_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("experiment spec must be a JSON object");
  check_keys(j,
             {"kind", "profile", "length", "family_sizes", "seeds", "generators", "nes", "ga",
              "classical", "output_dir", "workers", "cell_workers", "record_wall_clock"},
             "experiment spec");

  ExperimentSpec spec;
  try {
    if (!j.contains("kind")) throw std::invalid_argument("experiment spec needs a 'kind'");
    spec.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("profile")) spec.profile = parse_profile(j.at("profile").get<std::string>());
    const auto defaults = profile_defaults(spec.profile);
    spec.nes = defaults.nes;
    spec.ga = defaults.ga;
    spec.classical = defaults.classical;

    read_field(j, "length", spec.length);
    if (j.contains("family_sizes")) {
      spec.family_sizes = j.at("family_sizes").get<std::vector<std::size_t>>();
    } else {
      for (std::size_t k = 3; k <= 31; k += 2) spec.family_sizes.push_back(k);
    }
    spec.seeds = j.contains("seeds") ? j.at("seeds").get<std::vector<std::uint64_t>>()
                                     : std::vector<std::uint64_t>{1};
    read_field(j, "generators", spec.generators);
    if (j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
    read_field(j, "workers", spec.workers);
    read_field(j, "cell_workers", spec.cell_workers);
    read_field(j, "record_wall_clock", spec.record_wall_clock);

    if (j.contains("nes")) {
      const auto& n = j.at("nes");
      check_keys(n, {"sigma2", "batch_size", "num_iterations", "learning_rate", "use_baseline"}, "nes");
      read_field(n, "sigma2", spec.nes.sigma2);
      read_field(n, "batch_size", spec.nes.batch_size);
      read_field(n, "num_iterations", spec.nes.num_iterations);
      if (n.contains("learning_rate") && !n.at("learning_rate").is_null()) {
        spec.nes.learning_rate = n.at("learning_rate").get<double>();
      }
      read_field(n, "use_baseline", spec.nes.use_baseline);
    }
    if (j.contains("ga")) {
      const auto& g = j.at("ga");
      check_keys(g, {"population_size", "num_iterations", "elite_rate", "mutation_rate"}, "ga");
      read_field(g, "population_size", spec.ga.population_size);
      read_field(g, "num_iterations", spec.ga.num_iterations);
      read_field(g, "elite_rate", spec.ga.elite_rate);
      read_field(g, "mutation_rate", spec.ga.mutation_rate);
    }
    if (j.contains("classical")) {
      const auto& c = j.at("classical");
      check_keys(c,
                 {"generator", "num_samples", "balance_resampling", "deviation_threshold",
                  "retry_budget"},
                 "classical");
      read_field(c, "generator", spec.classical.generator);
      read_field(c, "num_samples", spec.classical.num_samples);
      read_field(c, "balance_resampling", spec.classical.balance_resampling);
      read_field(c, "deviation_threshold", spec.classical.deviation_threshold);
      read_field(c, "retry_budget", spec.classical.retry_budget);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment spec has a field of the wrong type: ") +
                                e.what());
  }
  return spec;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open experiment spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string spec_to_json(const ExperimentSpec& spec) {
  json j{{"kind", kind_name(spec.kind)},
         {"profile", profile_name(spec.profile)},
         {"length", spec.length},
         {"family_sizes", spec.family_sizes},
         {"seeds", spec.seeds},
         {"generators", spec.generators},
         {"nes", nes_json(spec.nes)},
         {"ga", ga_json(spec.ga)},
         {"classical", classical_json(spec.classical)},
         {"output_dir", spec.output_dir.string()},
         {"workers", spec.workers},
         {"cell_workers", spec.cell_workers},
         {"record_wall_clock", spec.record_wall_clock}};
  return j.dump(2);
}

std::vector<std::string> resolved_generators(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::NesTrain:
      return {spec.nes.use_baseline ? "nes" : "nes_nobaseline"};
    case ExperimentKind::GaRun:
      return {"ga"};
    case ExperimentKind::ClassicalBaseline:
      return {resolve_classical(spec.classical.generator, spec.length)};
    case ExperimentKind::Ablation:
      return {"nes", "nes_nobaseline"};
    case ExperimentKind::Sweep: {
      std::vector<std::string> out;
      for (const auto& g : spec.generators) {
        out.push_back(g == "auto" ? resolve_classical(g, spec.length) : g);
      }
      return out;
    }
  }
  return {};
}

void validate_spec(const ExperimentSpec& spec, std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  if (spec.length < 2) throw std::invalid_argument("code length must be at least 2");
  if (std::find(kPaperLengths.begin(), kPaperLengths.end(), spec.length) == kPaperLengths.end()) {
    warn("length " + std::to_string(spec.length) +
         " is outside the default grid; Gold/Weil families may be unavailable");
  }
  if (spec.profile == Profile::Desk && spec.length > 127) {
    warn("desk profile is intended for lengths up to 127");
  }
  if (spec.seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  for (auto k : spec.family_sizes) {
    if (k < 2) throw std::invalid_argument("family sizes must be at least 2");
  }
  if (spec.kind == ExperimentKind::Sweep && spec.generators.empty()) {
    warn("sweep lists no generators; results will be empty");
  }

  for (const auto& g : resolved_generators(spec)) {
    if (std::find(kKnownGenerators.begin(), kKnownGenerators.end(), g) == kKnownGenerators.end()) {
      throw std::invalid_argument("unknown generator '" + g + "'");
    }
    if (g == "gold" || g == "weil") {
      const auto full = classical_family(g, spec.length);
      for (auto k : spec.family_sizes) {
        if (k > full.family.count()) {
          throw std::invalid_argument(g + " family at length " + std::to_string(spec.length) +
                                      " has only " + std::to_string(full.family.count()) +
                                      " codes, cannot draw K=" + std::to_string(k));
        }
      }
      if (spec.classical.num_samples < 1) throw std::invalid_argument("num_samples must be >= 1");
    }
    if (g == "nes" || g == "nes_nobaseline") {
      NesConfig probe{2, spec.length, spec.nes.sigma2, spec.nes.batch_size,
                      spec.nes.num_iterations, spec.nes.learning_rate, true, 0};
      probe.validate();
    }
    if (g == "ga") {
      GaConfig probe{2, spec.length, spec.ga.population_size, spec.ga.num_iterations,
                     spec.ga.elite_rate, spec.ga.mutation_rate, 0};
      probe.validate();
    }
  }
}

ClassicalFamily classical_family(const std::string& generator, std::size_t length) {
  const auto name = resolve_classical(generator, length);
  if (name == "gold") {
    if (!has_gold(length)) {
      throw std::invalid_argument("no shipped Gold preferred pair for length " +
                                  std::to_string(length));
    }
    const auto spec = preferred_pair(*mersenne_degree(length));
    return {gold_family(spec), spec.describe()};
  }
  if (name == "weil") {
    if (!is_prime(length) || length < 3) {
      throw std::invalid_argument("Weil codes need a prime length, got " + std::to_string(length));
    }
    return {weil_family(WeilFamilySpec{length}), "weil(p=" + std::to_string(length) + ")"};
  }
  throw std::invalid_argument("'" + generator + "' is not a classical generator");
}

std::string format_result_row(const ResultRow& r) {
  std::ostringstream out;
  out << r.generator << ',' << r.length << ',' << r.family_size << ',' << r.seed << ','
      << format_double(r.f_ac) << ',' << format_double(r.f_cc) << ',' << format_double(r.f) << ','
      << format_double(r.sqrt_f) << ',' << format_double(r.welch) << ','
      << format_double(r.wall_seconds) << ',' << r.config_hash;
  return out.str();
}

void write_results(const fs::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << format_result_row(r) << '\n';
}

std::vector<ResultRow> read_results(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw std::runtime_error(path.string() + ": schema mismatch (unexpected results header)");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 11) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    ResultRow r;
    r.generator = c[0];
    r.length = std::stoul(c[1]);
    r.family_size = std::stoul(c[2]);
    r.seed = std::stoull(c[3]);
    r.f_ac = std::stod(c[4]);
    r.f_cc = std::stod(c[5]);
    r.f = std::stod(c[6]);
    r.sqrt_f = std::stod(c[7]);
    r.welch = std::stod(c[8]);
    r.wall_seconds = std::stod(c[9]);
    r.config_hash = c[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string Cell::stem(std::size_t length) const {
  return generator + "_L" + std::to_string(length) + "_K" + std::to_string(family_size) + "_s" +
         std::to_string(seed);
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (const auto& g : resolved_generators(spec)) {
    for (auto k : spec.family_sizes) {
      for (auto seed : spec.seeds) cells.push_back(Cell{g, k, seed});
    }
  }
  return cells;
}

std::string cell_config_hash(const ExperimentSpec& spec, const Cell& cell) {
  json j{{"generator", cell.generator},
         {"length", spec.length},
         {"family_size", cell.family_size},
         {"seed", cell.seed}};
  if (cell.generator == "nes" || cell.generator == "nes_nobaseline") {
    auto n = nes_json(spec.nes);
    n["use_baseline"] = cell.generator == "nes";
    n["learning_rate"] = spec.nes.learning_rate.value_or(default_learning_rate(spec.length));
    j["nes"] = n;
  } else if (cell.generator == "ga") {
    j["ga"] = ga_json(spec.ga);
  } else {
    auto c = classical_json(spec.classical);
    c["generator"] = cell.generator;
    j["classical"] = c;
  }
  j["version"] = kVersion;
  return hex64(fnv1a(j.dump()));
}

fs::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return fs::path(env);
  return fs::path("results");
}

namespace {

struct CellOutcome {
  std::optional<ResultRow> row;
  std::string error;
  json info = json::object();
};

CellOutcome run_cell(const ExperimentSpec& spec, const Cell& cell,
                     const std::map<std::string, ClassicalFamily>& classical,
                     const fs::path& out_dir) {
  CellOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  const auto stem = cell.stem(spec.length);
  const auto family_path = out_dir / "families" / (stem + ".txt");
  outcome.info["family_file"] = (fs::path("families") / (stem + ".txt")).string();

  CodeFamily champion;
  ObjectiveReport report;
  if (cell.generator == "nes" || cell.generator == "nes_nobaseline") {
    NesConfig cfg{cell.family_size, spec.length, spec.nes.sigma2, spec.nes.batch_size,
                  spec.nes.num_iterations, spec.nes.learning_rate, cell.generator == "nes",
                  cell.seed};
    TrainOptions options;
    options.workers = spec.workers;
    auto result = train(cfg, options);
    write_log_csv(out_dir / "logs" / (stem + ".csv"), result.log);
    outcome.info["log_file"] = (fs::path("logs") / (stem + ".csv")).string();
    if (!result.log.mean_discretization_f.empty()) {
      outcome.info["final_mean_discretization_f"] = result.log.mean_discretization_f.back();
    }
    champion = result.best;
    report = result.best_report;
  } else if (cell.generator == "ga") {
    GaConfig cfg{cell.family_size, spec.length, spec.ga.population_size, spec.ga.num_iterations,
                 spec.ga.elite_rate, spec.ga.mutation_rate, cell.seed};
    GaOptions options;
    options.workers = spec.workers;
    auto result = ga_run(cfg, options);
    write_log_csv(out_dir / "logs" / (stem + ".csv"), result.log);
    outcome.info["log_file"] = (fs::path("logs") / (stem + ".csv")).string();
    champion = result.best;
    report = result.best_report;
  } else {
    const auto& full = classical.at(cell.generator);
    BestOfOptions options;
    options.num_samples = spec.classical.num_samples;
    options.balance_resampling = spec.classical.balance_resampling;
    options.deviation_threshold = spec.classical.deviation_threshold;
    options.retry_budget = spec.classical.retry_budget;
    options.master_seed = cell.seed;
    options.workers = spec.workers;
    auto result = best_of_samples(full.family, cell.family_size, options);
    outcome.info["family_source"] = full.description;
    outcome.info["champion_sample_index"] = result.sample_index;
    champion = result.family;
    report = result.report;
  }
  write_family(family_path, FamilyFile{champion, cell.seed, cell.generator});

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ResultRow row;
  row.generator = cell.generator;
  row.length = spec.length;
  row.family_size = cell.family_size;
  row.seed = cell.seed;
  row.f_ac = report.f_ac;
  row.f_cc = report.f_cc;
  row.f = report.f;
  row.sqrt_f = std::sqrt(report.f);
  row.welch = welch_bound(cell.family_size, spec.length);
  row.wall_seconds = spec.record_wall_clock ? elapsed : 0.0;
  row.config_hash = cell_config_hash(spec, cell);
  outcome.row = row;
  return outcome;
}

}  // namespace

RunSummary run_experiment(const ExperimentSpec& spec) {
  RunSummary summary;
  validate_spec(spec, &summary.warnings);
  summary.output_dir = spec.output_dir.empty() ? default_output_dir() : spec.output_dir;
  const auto& out_dir = summary.output_dir;
  fs::create_directories(out_dir / "families");
  fs::create_directories(out_dir / "logs");

  const auto cells = expand_cells(spec);
  std::map<std::string, ClassicalFamily> classical;
  for (const auto& g : resolved_generators(spec)) {
    if ((g == "gold" || g == "weil") && !classical.count(g)) {
      classical.emplace(g, classical_family(g, spec.length));
    }
  }

  std::vector<CellOutcome> outcomes(cells.size());
  parallel_for(cells.size(), spec.cell_workers, [&](std::size_t i) {
    try {
      outcomes[i] = run_cell(spec, cells[i], classical, out_dir);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  json manifest;
  manifest["tool"] = "nescodes";
  manifest["version"] = kVersion;
  manifest["spec"] = json::parse(spec_to_json(spec));
  manifest["generators"] = resolved_generators(spec);
  manifest["family_sizes"] = spec.family_sizes;
  manifest["seeds"] = spec.seeds;
  json sources = json::object();
  for (const auto& [name, fam] : classical) sources[name] = fam.description;
  manifest["classical_families"] = sources;
  manifest["warnings"] = summary.warnings;
  json cell_list = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    json c = outcomes[i].info;
    c["generator"] = cells[i].generator;
    c["family_size"] = cells[i].family_size;
    c["seed"] = cells[i].seed;
    c["config_hash"] = cell_config_hash(spec, cells[i]);
    if (outcomes[i].row) {
      c["status"] = "ok";
      summary.rows.push_back(*outcomes[i].row);
    } else {
      c["status"] = "failed";
      c["error"] = outcomes[i].error;
      summary.failures.push_back(CellFailure{cells[i], outcomes[i].error});
    }
    cell_list.push_back(std::move(c));
  }
  manifest["cells"] = std::move(cell_list);

  write_results(out_dir / "results.csv", summary.rows);
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return summary;
}

RunSummary run_experiment(const fs::path& spec_path,
                          const std::optional<fs::path>& output_override) {
  auto spec = load_spec(spec_path);
  if (output_override) spec.output_dir = *output_override;
  return run_experiment(spec);
}

std::string compare_report(const std::vector<fs::path>& results_files, const fs::path& out_dir) {
  if (results_files.empty()) throw std::invalid_argument("compare_report needs at least one file");
  // length -> K -> generator -> f values
  std::map<std::size_t, std::map<std::size_t, std::map<std::string, std::vector<double>>>> grouped;
  std::vector<std::string> generator_order;
  for (const auto& path : results_files) {
    for (const auto& row : read_results(path)) {
      grouped[row.length][row.family_size][row.generator].push_back(row.f);
      if (std::find(generator_order.begin(), generator_order.end(), row.generator) ==
          generator_order.end()) {
        generator_order.push_back(row.generator);
      }
    }
  }

  fs::create_directories(out_dir);
  std::ostringstream table;
  for (const auto& [length, by_k] : grouped) {
    std::ofstream csv(out_dir / ("compare_L" + std::to_string(length) + ".csv"), std::ios::binary);
    csv << "family_size";
    table << "length " << length << " (median f over seeds)\n" << std::setw(6) << "K";
    for (const auto& g : generator_order) {
      csv << ',' << g;
      table << std::setw(16) << g;
    }
    csv << ",welch\n";
    table << std::setw(16) << "welch" << '\n';
    for (const auto& [k, by_gen] : by_k) {
      csv << k;
      table << std::setw(6) << k;
      for (const auto& g : generator_order) {
        auto it = by_gen.find(g);
        csv << ',';
        if (it != by_gen.end()) {
          const double m = median(it->second);
          csv << format_double(m);
          table << std::setw(16) << std::setprecision(6) << m;
        } else {
          table << std::setw(16) << "-";
        }
      }
      const double w = welch_bound(k, length);
      csv << ',' << format_double(w) << '\n';
      table << std::setw(16) << std::setprecision(6) << w << '\n';
    }
    table << '\n';
  }
  return table.str();
}

void merge_learning_curves(const std::vector<fs::path>& logs, const std::vector<std::string>& labels,
                           const fs::path& out_path) {
  if (logs.size() != labels.size()) throw std::invalid_argument("one label per log required");
  std::map<std::size_t, std::vector<std::optional<double>>> rows;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    for (const auto& r : read_log_csv(logs[i]).records) {
      auto& row = rows[r.iteration];
      row.resize(logs.size());
      row[i] = r.best_f;
    }
  }
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_path, std::ios::binary);
  out << "iteration";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (auto& [it, values] : rows) {
    values.resize(logs.size());
    out << it;
    for (const auto& v : values) {
      out << ',';
      if (v) out << format_double(*v);
    }
    out << '\n';
  }
}

std::vector<std::string> verify_results(const fs::path& results_dir) {
  std::vector<std::string> problems;
  for (const auto& row : read_results(results_dir / "results.csv")) {
    const Cell cell{row.generator, row.family_size, row.seed};
    const auto path = results_dir / "families" / (cell.stem(row.length) + ".txt");
    try {
      const auto file = read_family(path);
      const auto report = evaluate_family(file.family);
      if (report.f_ac != row.f_ac || report.f_cc != row.f_cc || report.f != row.f) {
        problems.push_back(path.string() + ": stored f=" + format_double(row.f) +
                           " but re-evaluation gives f=" + format_double(report.f));
      }
    } catch (const std::exception& e) {
      problems.push_back(path.string() + ": " + e.what());
    }
  }
  return problems;
}

}  // namespace nescodes
