#pragma once

#include <string>
#include <vector>

#include "nvmag/trace.hpp"

namespace nvmag {

// Output files: '#'-prefixed comment lines, then one header line, then
// comma-separated rows with '.' decimals.

std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> comments;  // without the leading "# "
  std::string header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

// Key/value report, one row per entry.
struct ReportRow {
  std::string key;
  double value;
};
void write_report_csv(const std::string& path,
                      const std::vector<std::string>& comments,
                      const std::vector<ReportRow>& rows);

void write_trace_csv(const std::string& path,
                     const std::vector<std::string>& comments,
                     const TimeTrace& trace, std::size_t max_samples = 0);

// Reads a trace written by write_trace_csv (units, sample rate and seed
// come from the comment header).
TimeTrace read_trace_csv(const std::string& path);

// Standard comment block: tool version, config hash, seed.
std::vector<std::string> standard_comments(const std::string& config_hash,
                                           std::uint64_t seed);

}  // namespace nvmag
