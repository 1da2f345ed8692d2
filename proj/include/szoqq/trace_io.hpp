// szoqq — safe zeroth-order optimizer for smooth constrained problems.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "szoqq/driver.hpp"

namespace szoqq {

/// Shortest decimal form that round-trips a double exactly (printf %.17g).
std::string format_double(double value);

/// Canonical serialization of one trace row, excluding wall_time_ms — the one
/// column allowed to differ between reruns of the same configuration.
std::string canonical_row(const IterationRecord& record);

/// FNV-1a 64-bit hash over the canonical rows.
std::uint64_t trace_digest(const std::vector<IterationRecord>& trace);

/// Columns: k, f0, step_norm, nu, lambda_inf, delta1, delta2_max,
/// samples_cumulative, wall_time_ms, events. Absent optionals are written as
/// empty cells; events are semicolon-joined.
void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace);

/// Parses a file produced by write_trace_csv. The in-memory-only iterate
/// column is left empty. Throws ConfigError on malformed input.
std::vector<IterationRecord> read_trace_csv(const std::string& path);

}  // namespace szoqq
