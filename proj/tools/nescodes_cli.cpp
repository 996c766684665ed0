// Command line front end: classical families, NES and GA training, sweeps,
// comparison reports and verification of stored results.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nescodes/classical.hpp"
#include "nescodes/correlation.hpp"
#include "nescodes/family_io.hpp"
#include "nescodes/harness.hpp"
#include "nescodes/nes.hpp"

namespace fs = std::filesystem;
using namespace nescodes;

namespace {

void print_summary(const RunSummary& summary) {
  for (const auto& w : summary.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& row : summary.rows) {
    std::cout << row.generator << " L=" << row.length << " K=" << row.family_size
              << " seed=" << row.seed << " f=" << row.f << " (f_ac=" << row.f_ac
              << ", f_cc=" << row.f_cc << ", welch=" << row.welch << ")\n";
  }
  for (const auto& f : summary.failures) {
    std::cerr << "cell " << f.cell.generator << " K=" << f.cell.family_size
              << " seed=" << f.cell.seed << " failed: " << f.message << '\n';
  }
  std::cout << "results written to " << summary.output_dir.string() << '\n';
}

struct Common {
  std::size_t length = 63;
  std::vector<std::size_t> counts{5};
  std::vector<std::uint64_t> seeds{1};
  std::string profile = "desk";
  std::size_t workers = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-l,--length", c.length, "code length")->capture_default_str();
  cmd->add_option("-K,--count", c.counts, "family size(s)")->capture_default_str();
  cmd->add_option("--seed", c.seeds, "master seed(s)")->capture_default_str();
  cmd->add_option("--profile", c.profile, "paper or desk")->capture_default_str();
  cmd->add_option("--workers", c.workers, "threads per cell (0 = all cores)")->capture_default_str();
  cmd->add_option("-o,--out", c.out, "output directory");
}

ExperimentSpec base_spec(ExperimentKind kind, const Common& c) {
  ExperimentSpec spec;
  spec.kind = kind;
  spec.profile = parse_profile(c.profile);
  const auto d = profile_defaults(spec.profile);
  spec.nes = d.nes;
  spec.ga = d.ga;
  spec.classical = d.classical;
  spec.length = c.length;
  spec.family_sizes = c.counts;
  spec.seeds = c.seeds;
  spec.workers = c.workers;
  spec.output_dir = c.out.empty() ? default_output_dir() : fs::path(c.out);
  return spec;
}

CodeFamily build_classical(const std::string& kind, std::size_t length, unsigned degree) {
  if (kind == "gold" || kind == "weil") return classical_family(kind, length).family;
  if (kind == "legendre") return CodeFamily({legendre_sequence(length)});
  if (kind == "mseq") return CodeFamily({lfsr_sequence(primitive_lfsr(degree))});
  throw std::invalid_argument("unknown family '" + kind + "' (gold, weil, legendre, mseq)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design and benchmark binary spreading-code families"};
  app.require_subcommand(1);
  int status = 0;

  // generate
  auto* gen = app.add_subcommand("generate", "emit a classical family or a best-of subset");
  std::string gen_kind = "gold";
  std::size_t gen_length = 63;
  unsigned gen_degree = 6;
  std::optional<std::size_t> gen_count;
  std::size_t gen_samples = 1;
  std::uint64_t gen_seed = 1;
  bool gen_balance = false;
  std::string gen_out;
  gen->add_option("family", gen_kind, "gold, weil, legendre or mseq")->capture_default_str();
  gen->add_option("-l,--length", gen_length, "code length (gold, weil, legendre)")
      ->capture_default_str();
  gen->add_option("-n,--degree", gen_degree, "register degree (mseq)")->capture_default_str();
  gen->add_option("-K,--count", gen_count, "draw a random subset of this size");
  gen->add_option("--samples", gen_samples, "keep the best of this many subsets")
      ->capture_default_str();
  gen->add_flag("--balance", gen_balance, "redraw subsets with lopsided f_ac/f_cc");
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("-o,--out", gen_out, "family file (stdout if omitted)");
  gen->callback([&] {
    auto family = build_classical(gen_kind, gen_length, gen_degree);
    if (gen_count) {
      BestOfOptions options;
      options.num_samples = gen_samples;
      options.balance_resampling = gen_balance;
      options.master_seed = gen_seed;
      family = best_of_samples(family, *gen_count, options).family;
    }
    const FamilyFile file{family, gen_seed, gen_kind};
    if (gen_out.empty()) {
      std::cout << format_family(file);
    } else {
      write_family(gen_out, file);
    }
    if (family.count() >= 2) {
      const auto r = evaluate_family(family);
      std::cerr << "K=" << family.count() << " L=" << family.length() << " f=" << r.f
                << " (f_ac=" << r.f_ac << ", f_cc=" << r.f_cc << ")\n";
    }
  });

  // train-nes
  auto* nes = app.add_subcommand("train-nes", "train the NES code generator");
  Common nes_common;
  add_common(nes, nes_common);
  std::optional<double> sigma2, lr;
  std::optional<std::size_t> batch_size, nes_iterations;
  bool no_baseline = false;
  std::string checkpoint, resume_from;
  std::size_t checkpoint_every = 100;
  nes->add_option("--sigma2", sigma2, "proposal variance");
  nes->add_option("--batch-size", batch_size, "samples per iteration");
  nes->add_option("--iterations", nes_iterations, "training iterations");
  nes->add_option("--lr", lr, "Adam learning rate");
  nes->add_flag("--no-baseline", no_baseline, "disable the mean baseline");
  nes->add_option("--checkpoint", checkpoint, "checkpoint file");
  nes->add_option("--checkpoint-every", checkpoint_every)->capture_default_str();
  nes->add_option("--resume", resume_from, "resume from a checkpoint file");
  nes->callback([&] {
    auto spec = base_spec(ExperimentKind::NesTrain, nes_common);
    if (sigma2) spec.nes.sigma2 = *sigma2;
    if (batch_size) spec.nes.batch_size = *batch_size;
    if (nes_iterations) spec.nes.num_iterations = *nes_iterations;
    if (lr) spec.nes.learning_rate = *lr;
    spec.nes.use_baseline = !no_baseline;

    if (checkpoint.empty() && resume_from.empty()) {
      const auto summary = run_experiment(spec);
      print_summary(summary);
      if (!summary.ok()) status = 1;
      return;
    }
    // Checkpointed runs handle one cell directly.
    TrainState state;
    if (!resume_from.empty()) {
      state = read_checkpoint(resume_from);
    } else {
      if (spec.family_sizes.size() != 1 || spec.seeds.size() != 1) {
        throw std::invalid_argument("checkpointed training takes exactly one K and one seed");
      }
      state = initial_state(NesConfig{spec.family_sizes.front(), spec.length, spec.nes.sigma2,
                                      spec.nes.batch_size, spec.nes.num_iterations,
                                      spec.nes.learning_rate, spec.nes.use_baseline,
                                      spec.seeds.front()});
    }
    TrainOptions options;
    options.workers = spec.workers;
    options.checkpoint_every = checkpoint_every;
    if (!checkpoint.empty()) options.checkpoint_path = fs::path(checkpoint);
    else options.checkpoint_path = fs::path(resume_from);
    const auto result = resume(std::move(state), options);
    write_checkpoint(*options.checkpoint_path, result.final_state);
    const auto& cfg = result.final_state.config;
    const Cell cell{cfg.use_baseline ? "nes" : "nes_nobaseline", cfg.count, cfg.master_seed};
    const auto stem = cell.stem(cfg.length);
    fs::create_directories(spec.output_dir);
    write_family(spec.output_dir / (stem + ".txt"), FamilyFile{result.best, cfg.master_seed, cell.generator});
    write_log_csv(spec.output_dir / (stem + ".csv"), result.log);
    std::cout << cell.generator << " L=" << cfg.length << " K=" << cfg.count
              << " iterations done=" << result.final_state.next_iteration
              << " best f=" << result.best_report.f << '\n';
  });

  // run-ga
  auto* ga = app.add_subcommand("run-ga", "run the elitist genetic algorithm");
  Common ga_common;
  add_common(ga, ga_common);
  std::optional<std::size_t> population, ga_iterations;
  std::optional<double> elite_rate, mutation_rate;
  ga->add_option("--population", population, "population size");
  ga->add_option("--iterations", ga_iterations, "generations");
  ga->add_option("--elite-rate", elite_rate, "fraction of elites carried over");
  ga->add_option("--mutation-rate", mutation_rate, "per-bit flip probability");
  ga->callback([&] {
    auto spec = base_spec(ExperimentKind::GaRun, ga_common);
    if (population) spec.ga.population_size = *population;
    if (ga_iterations) spec.ga.num_iterations = *ga_iterations;
    if (elite_rate) spec.ga.elite_rate = *elite_rate;
    if (mutation_rate) spec.ga.mutation_rate = *mutation_rate;
    const auto summary = run_experiment(spec);
    print_summary(summary);
    if (!summary.ok()) status = 1;
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run every cell of an experiment spec");
  std::string spec_path, sweep_out;
  sweep->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  sweep->add_option("-o,--out", sweep_out, "override the output directory");
  sweep->callback([&] {
    std::optional<fs::path> out;
    if (!sweep_out.empty()) out = fs::path(sweep_out);
    const auto summary = run_experiment(fs::path(spec_path), out);
    print_summary(summary);
    if (!summary.ok()) status = 1;
  });

  // report
  auto* report = app.add_subcommand("report", "compare results files and merge learning curves");
  std::vector<std::string> report_inputs, curves, labels;
  std::string report_out = "report";
  report->add_option("results", report_inputs, "results.csv files");
  report->add_option("--curves", curves, "training logs to align by iteration");
  report->add_option("--labels", labels, "one label per curve");
  report->add_option("-o,--out", report_out)->capture_default_str();
  report->callback([&] {
    if (report_inputs.empty() && curves.empty()) {
      throw std::invalid_argument("report needs results files or --curves");
    }
    if (!report_inputs.empty()) {
      std::vector<fs::path> files(report_inputs.begin(), report_inputs.end());
      std::cout << compare_report(files, report_out);
    }
    if (!curves.empty()) {
      if (labels.empty()) {
        for (const auto& c : curves) labels.push_back(fs::path(c).stem().string());
      }
      std::vector<fs::path> logs(curves.begin(), curves.end());
      merge_learning_curves(logs, labels, fs::path(report_out) / "curves.csv");
      std::cout << "curves written to " << (fs::path(report_out) / "curves.csv").string() << '\n';
    }
  });

  // verify
  auto* verify = app.add_subcommand("verify", "re-evaluate stored champion families");
  std::string verify_dir;
  verify->add_option("dir", verify_dir, "results directory")->required();
  verify->callback([&] {
    const auto problems = verify_results(verify_dir);
    for (const auto& p : problems) std::cerr << p << '\n';
    if (!problems.empty()) {
      status = 1;
    } else {
      std::cout << "all rows verified\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
