#include "plowtrack/csv.hpp"

#include <array>

namespace plowtrack {

namespace {

char sniff_delimiter(std::string_view text) {
  const auto eol = text.find('\n');
  const std::string_view first = text.substr(0, eol);
  constexpr std::array<char, 4> kCandidates{',', '\t', ';', '|'};
  char best = ',';
  std::size_t best_count = 0;
  for (char c : kCandidates) {
    std::size_t n = 0;
    bool quoted = false;
    for (char ch : first) {
      if (ch == '"') quoted = !quoted;
      if (!quoted && ch == c) ++n;
    }
    if (n > best_count) {
      best = c;
      best_count = n;
    }
  }
  return best;
}

bool blank(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    if (!trim(c).empty()) return false;
  }
  return true;
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string_view source, char delimiter) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  CsvTable table;
  table.delimiter = delimiter != 0 ? delimiter : sniff_delimiter(text);
  const char delim = table.delimiter;

  std::size_t line = 1;
  std::size_t i = 0;
  bool have_header = false;
  while (i < text.size()) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool quoted = false;
    bool done = false;
    while (!done) {
      if (i >= text.size()) {
        if (quoted) {
          throw FormatError(std::string(source) + ":" + std::to_string(row.line) + ": unterminated quoted field");
        }
        row.cells.push_back(std::move(field));
        done = true;
        break;
      }
      const char ch = text[i++];
      if (quoted) {
        if (ch == '"') {
          if (i < text.size() && text[i] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line;
          field.push_back(ch);
        }
      } else if (ch == '"' && trim(field).empty()) {
        field.clear();
        quoted = true;
      } else if (ch == delim) {
        row.cells.push_back(std::move(field));
        field.clear();
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && i < text.size() && text[i] == '\n') ++i;
        ++line;
        row.cells.push_back(std::move(field));
        done = true;
      } else {
        field.push_back(ch);
      }
    }
    if (blank(row.cells)) continue;
    if (!have_header) {
      for (auto& c : row.cells) c = std::string(trim(c));
      table.header = std::move(row.cells);
      have_header = true;
    } else {
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

ColumnMap::ColumnMap(const std::vector<std::string>& header, std::string source)
    : header_(header), source_(std::move(source)) {}

std::optional<std::size_t> ColumnMap::find(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (iequals(trim(header_[i]), name)) return i;
  }
  return std::nullopt;
}

std::size_t ColumnMap::require(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw FormatError(source_ + ": missing required column '" + std::string(name) + "'");
}

std::string_view cell(const CsvRow& row, std::size_t column) {
  return column < row.cells.size() ? std::string_view(row.cells[column]) : std::string_view{};
}

std::string_view cell(const CsvRow& row, std::optional<std::size_t> column) {
  return column ? cell(row, *column) : std::string_view{};
}

void append_csv_record(std::string& out, const std::vector<std::string>& cells, char delimiter) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    const std::string& c = cells[i];
    const bool needs_quotes = c.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
    if (!needs_quotes) {
      out += c;
      continue;
    }
    out.push_back('"');
    for (char ch : c) {
      if (ch == '"') out.push_back('"');
      out.push_back(ch);
    }
    out.push_back('"');
  }
  out.push_back('\n');
}

}  // namespace plowtrack
