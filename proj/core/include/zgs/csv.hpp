#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace zgs::csv {

/// A parsed CSV file. `line_numbers[i]` is the 1-based source line of `rows[i]`.
struct Table {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Index of a header column; throws ParseError when absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a CSV file. RFC 4180 quoting is honoured. A missing file raises
/// MissingInput; ragged rows raise ParseError with the line number.
Table read(const std::filesystem::path& path, bool has_header = true);

/// Formats a real with 17 significant digits so the value round-trips.
std::string format_real(double value);

double parse_real(std::string_view cell, const std::filesystem::path& path, std::size_t line);
std::int64_t parse_int(std::string_view cell, const std::filesystem::path& path, std::size_t line);

/// Quotes a cell when it contains a separator, quote, or newline.
std::string escape(std::string_view cell);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace zgs::csv
