#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "lckw/errors.hpp"

namespace lckw::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(std::span<const double> values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(format_number(v));
  row(fields);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) {
    throw NumericalError("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                         std::to_string(columns_));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("CSV is missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  double value = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell == "nan") return std::nan("");
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("CSV data row " + std::to_string(row + 1) + ", column '" + header.at(col) +
                      "': not a number: '" + cell + "'");
  }
  return value;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() < table.header.size()) {
      throw ConfigError("CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ConfigError("CSV input is empty");
  return table;
}

std::vector<calibrate::TrajectoryRecord> read_trajectories(std::istream& in, double to_feet) {
  const CsvTable table = read_csv(in);
  const std::size_t c_id = table.column("vehicle_id");
  const std::size_t c_t = table.column("t");
  const std::size_t c_x = table.column("x");
  const std::size_t c_y = table.column("y");
  const std::size_t c_lane = table.column("lane");
  std::vector<calibrate::TrajectoryRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    calibrate::TrajectoryRecord rec;
    rec.vehicle_id = static_cast<std::int64_t>(table.number(r, c_id));
    rec.t = table.number(r, c_t);
    rec.x = table.number(r, c_x) * to_feet;
    rec.y = table.number(r, c_y) * to_feet;
    rec.lane = static_cast<int>(table.number(r, c_lane));
    out.push_back(rec);
  }
  return out;
}

void write_trajectories(std::ostream& out, std::span<const calibrate::TrajectoryRecord> records) {
  CsvWriter w(out, {"vehicle_id", "t", "x", "y", "lane"});
  for (const auto& r : records) {
    w.row({std::to_string(r.vehicle_id), format_number(r.t), format_number(r.x),
           format_number(r.y), std::to_string(r.lane)});
  }
}

}  // namespace lckw::cli
