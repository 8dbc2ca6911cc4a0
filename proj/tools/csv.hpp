#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lckw/calibrate.hpp"

namespace lckw::cli {

/// Fixed formatting for every number written to CSV: 12 significant digits.
std::string format_number(double value);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(std::span<const double> values);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ConfigError when absent.
  std::size_t column(const std::string& name) const;
  /// Parses a cell as a number; throws ConfigError naming row and column.
  double number(std::size_t row, std::size_t col) const;
};

/// Reads comma-separated text with a header row. Blank lines are skipped.
CsvTable read_csv(std::istream& in);

/// Trajectory CSV with columns vehicle_id,t,x,y,lane (extra columns ignored).
/// Positions are multiplied by `to_feet`.
std::vector<calibrate::TrajectoryRecord> read_trajectories(std::istream& in, double to_feet = 1.0);

void write_trajectories(std::ostream& out, std::span<const calibrate::TrajectoryRecord> records);

}  // namespace lckw::cli
