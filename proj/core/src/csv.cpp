#include "zgs/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "zgs/error.hpp"

namespace zgs::csv {
namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

// Splits one logical record starting at `pos`; advances `pos` and `line`.
std::vector<std::string> split_record(const std::string& text, std::size_t& pos, std::size_t& line,
                                      const std::filesystem::path& path) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  const std::size_t start_line = line;
  while (pos < text.size()) {
    char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cell.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      if (c == '\n') ++line;
      cell.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"') {
      quoted = true;
      ++pos;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
      ++pos;
    } else if (c == '\r') {
      ++pos;
    } else if (c == '\n') {
      ++pos;
      ++line;
      break;
    } else {
      cell.push_back(c);
      ++pos;
    }
  }
  if (quoted) raise(ErrorKind::ParseError, "unterminated quote at " + where(path, start_line));
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  raise(ErrorKind::ParseError, path.string() + ": missing column '" + std::string(name) + "'");
}

Table read(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::MissingInput, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Table table;
  table.path = path;
  std::size_t pos = 0;
  std::size_t line = 1;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

  bool header_pending = has_header;
  while (pos < text.size()) {
    const std::size_t record_line = line;
    auto cells = split_record(text, pos, line, path);
    if (cells.size() == 1 && cells[0].empty()) continue;  // blank line
    if (header_pending) {
      table.header = std::move(cells);
      header_pending = false;
      continue;
    }
    const std::size_t expected = has_header ? table.header.size()
                                 : table.rows.empty() ? cells.size()
                                                      : table.rows.front().size();
    if (cells.size() != expected) {
      raise(ErrorKind::ParseError, "expected " + std::to_string(expected) + " fields, found " +
                                       std::to_string(cells.size()) + " at " + where(path, record_line));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(record_line);
  }
  if (header_pending) raise(ErrorKind::ParseError, path.string() + ": missing header row");
  return table;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_real(std::string_view cell, const std::filesystem::path& path, std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    raise(ErrorKind::ParseError, "malformed number '" + std::string(cell) + "' at " + where(path, line));
  }
  return value;
}

std::int64_t parse_int(std::string_view cell, const std::filesystem::path& path, std::size_t line) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    raise(ErrorKind::ParseError, "malformed integer '" + std::string(cell) + "' at " + where(path, line));
  }
  return value;
}

std::string escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << escape(cells[i]);
  }
  out << '\n';
}

}  // namespace zgs::csv
