#include "annulus/cli/format.hpp"

#include <charconv>
#include <cmath>

#include "annulus/cli/config.hpp"

namespace annulus::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, ptr};
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + std::string(s) + "'");
  return v;
}

std::vector<double> parse_double_list(std::string_view s) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(parse_double(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

void Metadata::write(std::ostream& out) const {
  for (const auto& [k, v] : entries) out << "# " << k << ": " << v << '\n';
}

}  // namespace annulus::cli
