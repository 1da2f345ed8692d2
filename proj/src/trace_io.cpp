#include "szoqq/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "szoqq/errors.hpp"

namespace szoqq {

namespace {

constexpr const char* kHeader =
    "k,f0,step_norm,nu,lambda_inf,delta1,delta2_max,samples_cumulative,wall_time_ms,events";

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

std::string join_events(const std::vector<std::string>& events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0) out += ';';
    out += events[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::optional<double> parse_optional(const std::string& field, const char* name) {
  if (field.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("trace: malformed ") + name + " field: " + field);
  }
}

double parse_double(const std::string& field, const char* name) {
  const auto v = parse_optional(field, name);
  if (!v) throw ConfigError(std::string("trace: empty ") + name + " field");
  return *v;
}

std::int64_t parse_int(const std::string& field, const char* name) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("trace: malformed ") + name + " field: " + field);
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string canonical_row(const IterationRecord& record) {
  std::string row;
  row += std::to_string(record.k);
  row += '|';
  row += format_double(record.f0);
  row += '|';
  row += format_optional(record.step_norm);
  row += '|';
  row += format_optional(record.nu);
  row += '|';
  row += format_optional(record.lambda_inf);
  row += '|';
  row += format_optional(record.delta1);
  row += '|';
  row += format_optional(record.delta2_max);
  row += '|';
  row += std::to_string(record.samples_cumulative);
  row += '|';
  row += join_events(record.events);
  return row;
}

std::uint64_t trace_digest(const std::vector<IterationRecord>& trace) {
  std::uint64_t hash = 14695981039346656037ull;
  auto mix = [&hash](const std::string& text) {
    for (unsigned char c : text) {
      hash ^= c;
      hash *= 1099511628211ull;
    }
    hash ^= static_cast<unsigned char>('\n');
    hash *= 1099511628211ull;
  };
  for (const auto& record : trace) mix(canonical_row(record));
  return hash;
}

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open trace file for writing: " + path);
  out << kHeader << '\n';
  for (const auto& record : trace) {
    out << record.k << ',' << format_double(record.f0) << ','
        << format_optional(record.step_norm) << ',' << format_optional(record.nu) << ','
        << format_optional(record.lambda_inf) << ',' << format_optional(record.delta1)
        << ',' << format_optional(record.delta2_max) << ',' << record.samples_cumulative
        << ',' << format_double(record.wall_time_ms) << ',' << join_events(record.events)
        << '\n';
  }
  if (!out) throw ConfigError("failed writing trace file: " + path);
}

std::vector<IterationRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw ConfigError("trace: missing or unexpected header in " + path);
  }
  std::vector<IterationRecord> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 10) {
      throw ConfigError("trace: expected 10 columns, got " +
                        std::to_string(fields.size()) + " in " + path);
    }
    IterationRecord record;
    record.k = static_cast<int>(parse_int(fields[0], "k"));
    record.f0 = parse_double(fields[1], "f0");
    record.step_norm = parse_optional(fields[2], "step_norm");
    record.nu = parse_optional(fields[3], "nu");
    record.lambda_inf = parse_optional(fields[4], "lambda_inf");
    record.delta1 = parse_optional(fields[5], "delta1");
    record.delta2_max = parse_optional(fields[6], "delta2_max");
    record.samples_cumulative = parse_int(fields[7], "samples_cumulative");
    record.wall_time_ms = parse_double(fields[8], "wall_time_ms");
    if (!fields[9].empty()) record.events = split(fields[9], ';');
    trace.push_back(std::move(record));
  }
  return trace;
}

}  // namespace szoqq
