#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace nescodes {

/// One row per evaluated batch (NES) or generation (GA).
struct TrainRecord {
  std::size_t iteration = 0;
  double mean_f = 0.0;
  double min_f = 0.0;
  double baseline = 0.0;
  double best_f = 0.0;
  double grad_norm = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  /// Objective of the thresholded proposal mean per NES iteration; empty for GA.
  std::vector<double> mean_discretization_f;
  double wall_seconds = 0.0;
};

inline constexpr const char* kTrainLogHeader = "iteration,mean_f,min_f,baseline,best_f,grad_norm";

/// Shortest text that parses back to the same double.
std::string format_double(double value);

std::string format_log_csv(const TrainLog& log);
void write_log_csv(const std::filesystem::path& path, const TrainLog& log);
TrainLog read_log_csv(const std::filesystem::path& path);

}  // namespace nescodes
