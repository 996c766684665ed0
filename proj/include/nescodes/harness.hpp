#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nescodes/classical.hpp"
#include "nescodes/correlation.hpp"

namespace nescodes {

enum class ExperimentKind { NesTrain, GaRun, ClassicalBaseline, Ablation, Sweep };
enum class Profile { Paper, Desk };

struct NesSettings {
  double sigma2 = 0.1;
  std::size_t batch_size = 100;
  std::size_t num_iterations = 10000;
  std::optional<double> learning_rate;
  bool use_baseline = true;
};

struct GaSettings {
  std::size_t population_size = 100;
  std::size_t num_iterations = 10000;
  double elite_rate = 0.01;
  double mutation_rate = 0.005;
};

struct ClassicalSettings {
  std::string generator = "auto";  // gold | weil | auto
  std::size_t num_samples = 10000;
  bool balance_resampling = true;
  double deviation_threshold = 0.2;
  std::size_t retry_budget = 10;
};

struct ProfileDefaults {
  NesSettings nes;
  GaSettings ga;
  ClassicalSettings classical;
};

/// paper: N=100, 10,000 iterations, GA population 100, 10,000 samples.
/// desk:  N=50, 1,500 iterations, GA population 50, 1,000 samples.
ProfileDefaults profile_defaults(Profile profile);
Profile parse_profile(const std::string& name);
std::string profile_name(Profile profile);

/// Lengths exercised by default; other lengths >= 2 are accepted with a warning.
inline const std::vector<std::size_t> kPaperLengths = {63, 67, 127, 257, 511, 521, 1023, 1031};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Sweep;
  Profile profile = Profile::Desk;
  std::size_t length = 63;
  std::vector<std::size_t> family_sizes;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> generators;  // sweep only
  NesSettings nes;
  GaSettings ga;
  ClassicalSettings classical;
  std::filesystem::path output_dir;
  std::size_t workers = 1;       // threads inside a cell
  std::size_t cell_workers = 1;  // cells run concurrently
  bool record_wall_clock = true;
};

std::string kind_name(ExperimentKind kind);

/// Parses the JSON experiment description. Profile defaults are applied first,
/// then any explicit "nes"/"ga"/"classical" fields override them.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::filesystem::path& path);
std::string spec_to_json(const ExperimentSpec& spec);

/// Generators the spec expands to, in execution order.
std::vector<std::string> resolved_generators(const ExperimentSpec& spec);

/// Throws before any cell runs if the spec cannot be executed.
void validate_spec(const ExperimentSpec& spec, std::vector<std::string>* warnings = nullptr);

/// Full classical family for a generator name at a length.
struct ClassicalFamily {
  CodeFamily family;
  std::string description;
};
ClassicalFamily classical_family(const std::string& generator, std::size_t length);

struct ResultRow {
  std::string generator;
  std::size_t length = 0;
  std::size_t family_size = 0;
  std::uint64_t seed = 0;
  double f_ac = 0.0;
  double f_cc = 0.0;
  double f = 0.0;
  double sqrt_f = 0.0;
  double welch = 0.0;
  double wall_seconds = 0.0;
  std::string config_hash;
};

inline constexpr const char* kResultsHeader =
    "generator,length,family_size,seed,f_ac,f_cc,f,sqrt_f,welch,wall_seconds,config_hash";

std::string format_result_row(const ResultRow& row);
void write_results(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

struct Cell {
  std::string generator;
  std::size_t family_size = 0;
  std::uint64_t seed = 0;

  std::string stem(std::size_t length) const;
};

std::vector<Cell> expand_cells(const ExperimentSpec& spec);

/// Stable hash of everything that determines a cell's output.
std::string cell_config_hash(const ExperimentSpec& spec, const Cell& cell);

struct CellFailure {
  Cell cell;
  std::string message;
};

struct RunSummary {
  std::filesystem::path output_dir;
  std::vector<ResultRow> rows;
  std::vector<CellFailure> failures;
  std::vector<std::string> warnings;
  bool ok() const { return failures.empty(); }
};

/// Writes results.csv, families/<stem>.txt, logs/<stem>.csv for trained cells,
/// and manifest.json under spec.output_dir.
RunSummary run_experiment(const ExperimentSpec& spec);
RunSummary run_experiment(const std::filesystem::path& spec_path,
                          const std::optional<std::filesystem::path>& output_override = {});

/// Groups rows by length; each table has one line per K with the median f of
/// every generator and the Welch reference. Writes compare_L<length>.csv files
/// into out_dir and returns a printable table.
std::string compare_report(const std::vector<std::filesystem::path>& results_files,
                           const std::filesystem::path& out_dir);

/// Aligns the best_f column of several training logs by iteration.
void merge_learning_curves(const std::vector<std::filesystem::path>& logs,
                           const std::vector<std::string>& labels,
                           const std::filesystem::path& out_path);

/// Re-evaluates every stored champion in a results directory. Returns one
/// message per mismatch or missing family; empty means every row verified.
std::vector<std::string> verify_results(const std::filesystem::path& results_dir);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "NESCODES_OUTPUT_DIR";
std::filesystem::path default_output_dir();

}  // namespace nescodes
