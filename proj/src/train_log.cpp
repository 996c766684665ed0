#include "nescodes/train_log.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nescodes {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string format_log_csv(const TrainLog& log) {
  std::ostringstream out;
  out << kTrainLogHeader << '\n';
  for (const auto& r : log.records) {
    out << r.iteration << ',' << format_double(r.mean_f) << ',' << format_double(r.min_f) << ','
        << format_double(r.baseline) << ',' << format_double(r.best_f) << ','
        << format_double(r.grad_norm) << '\n';
  }
  return out.str();
}

void write_log_csv(const std::filesystem::path& path, const TrainLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_log_csv(log);
}

TrainLog read_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTrainLogHeader) {
    throw std::runtime_error(path.string() + ": not a training log (unexpected header)");
  }
  TrainLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    TrainRecord r;
    r.iteration = std::stoul(cells[0]);
    r.mean_f = std::stod(cells[1]);
    r.min_f = std::stod(cells[2]);
    r.baseline = std::stod(cells[3]);
    r.best_f = std::stod(cells[4]);
    r.grad_norm = std::stod(cells[5]);
    log.records.push_back(r);
  }
  return log;
}

}  // namespace nescodes
