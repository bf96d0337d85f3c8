#include "safeshed/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace safeshed {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::string& path, const std::vector<std::string>& obs_labels,
                          const std::vector<std::string>& action_labels,
                          std::span<const TrajectoryRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open trajectory file for writing: " + path);
  }
  out << "t";
  for (const auto& label : obs_labels) {
    out << "," << label;
  }
  for (const auto& label : action_labels) {
    out << "," << label;
  }
  out << ",reward,safety\n";
  for (const auto& row : rows) {
    out << format_double(row.t);
    for (double v : row.observation) {
      out << "," << format_double(v);
    }
    for (double a : row.action) {
      out << "," << format_double(a);
    }
    out << "," << format_double(row.reward) << ",";
    if (row.safety) {
      out << format_double(*row.safety);
    }
    out << "\n";
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_field(const std::string& field, int line_number) {
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::runtime_error("malformed CSV at line " + std::to_string(line_number) +
                             ": bad numeric field '" + field + "'");
  }
  return value;
}

}  // namespace

void export_plotdata(const std::string& input_csv, const std::string& output_csv, double t_pf,
                     const RecoveryEnvelope& envelope) {
  std::ifstream in(input_csv, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open trajectory file: " + input_csv);
  }
  std::ofstream out(output_csv, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file for writing: " + output_csv);
  }

  std::string line;
  int line_number = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    ++line_number;
    if (line_number == 1) {
      columns = split_csv_line(line).size();
      if (columns == 0 || split_csv_line(line).front() != "t") {
        throw std::runtime_error("malformed CSV at line 1: expected header starting with 't'");
      }
      out << line << ",envelope_lower\n";
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != columns) {
      throw std::runtime_error("malformed CSV at line " + std::to_string(line_number) + ": got " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(columns));
    }
    const double t = parse_field(fields.front(), line_number);
    out << line << ",";
    if (t > t_pf) {
      out << format_double(envelope.lower_bound_at(t - t_pf));
    }
    out << "\n";
  }
  if (line_number == 0) {
    throw std::runtime_error("malformed CSV at line 1: empty file");
  }
}

}  // namespace safeshed
