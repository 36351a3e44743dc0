#pragma once

// Number formatting and CSV helpers for the annulus-dyn outputs.

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace annulus::cli {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Empty string for an absent value.
std::string format_optional(const std::optional<double>& v);

/// Strict full-string parse; raises ConfigError.
double parse_double(std::string_view s);
/// Comma-separated list of doubles.
std::vector<double> parse_double_list(std::string_view s);

/// Joins the cells with commas and ends the line.
void write_row(std::ostream& out, const std::vector<std::string>& cells);

/// Provenance lines, each written as "# key: value".
struct Metadata {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(std::string key, std::string value) {
    entries.emplace_back(std::move(key), std::move(value));
  }
  void write(std::ostream& out) const;
};

}  // namespace annulus::cli
