#include "nvmag/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvmag/errors.hpp"

#ifndef NVMAG_VERSION
#define NVMAG_VERSION "0.0.0"
#endif

namespace nvmag {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string format_sample(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("csv: cannot open '" + path + "' for writing");
  }
  return out;
}

}  // namespace

std::vector<std::string> standard_comments(const std::string& config_hash,
                                           std::uint64_t seed) {
  return {std::string("nvmag ") + NVMAG_VERSION,
          "config_hash=" + config_hash + " seed=" + std::to_string(seed)};
}

void write_csv(const std::string& path, const CsvTable& table) {
  auto out = open_out(path);
  for (const auto& c : table.comments) out << "# " << c << "\n";
  out << table.header << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << format_number(row[i]);
    }
    out << "\n";
  }
}

void write_report_csv(const std::string& path,
                      const std::vector<std::string>& comments,
                      const std::vector<ReportRow>& rows) {
  auto out = open_out(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "quantity,value\n";
  for (const auto& row : rows) {
    out << row.key << "," << format_number(row.value) << "\n";
  }
}

void write_trace_csv(const std::string& path,
                     const std::vector<std::string>& comments,
                     const TimeTrace& trace, std::size_t max_samples) {
  auto out = open_out(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "# units=" << (trace.units == TraceUnits::volts ? "volts" : "tesla")
      << " sample_rate_hz=" << format_number(trace.sample_rate_hz);
  if (trace.seed) out << " seed=" << *trace.seed;
  out << "\n";
  out << "time_s,value\n";
  const std::size_t n = max_samples > 0
                            ? std::min(max_samples, trace.samples.size())
                            : trace.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << format_sample(static_cast<double>(i) / trace.sample_rate_hz) << ","
        << format_sample(trace.samples[i]) << "\n";
  }
}

TimeTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("csv: cannot open trace '" + path + "'");
  }
  TimeTrace trace;
  trace.sample_rate_hz = 0;
  bool have_header = false;
  std::string line;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "units") {
          if (value == "volts") {
            trace.units = TraceUnits::volts;
          } else if (value == "tesla") {
            trace.units = TraceUnits::tesla;
          } else {
            throw ValidationError("csv: unknown trace units '" + value + "'");
          }
        } else if (key == "sample_rate_hz") {
          trace.sample_rate_hz = std::stod(value);
        } else if (key == "seed") {
          trace.seed = std::stoull(value);
        }
      }
      continue;
    }
    if (!have_header) {
      have_header = true;  // column header line
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("csv: malformed trace row '" + line + "'");
    }
    times.push_back(std::stod(line.substr(0, comma)));
    trace.samples.push_back(std::stod(line.substr(comma + 1)));
  }
  if (trace.samples.size() < 2) {
    throw ValidationError("csv: trace has fewer than 2 samples");
  }
  if (!(trace.sample_rate_hz > 0)) {
    // Fall back to the time column when the header is absent.
    trace.sample_rate_hz = 1.0 / (times[1] - times[0]);
  }
  return trace;
}

}  // namespace nvmag
