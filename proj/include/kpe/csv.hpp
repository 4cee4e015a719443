#pragma once

#include <string>
#include <vector>

namespace kpe {

/// Shortest round-trip decimal form ("%.17g" trimmed); stable across runs.
std::string format_double(double value);

/// Splits one CSV line on commas (no quoting; our files never need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace kpe
