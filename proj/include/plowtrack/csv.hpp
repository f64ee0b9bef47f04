#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plowtrack/io.hpp"

namespace plowtrack {

struct CsvRow {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> cells;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
  char delimiter = ',';
};

/// Parses delimiter-separated text with RFC 4180 quoting. With `delimiter`
/// 0 the delimiter is sniffed from the header line (comma, tab, semicolon or
/// pipe). A UTF-8 BOM and blank lines are skipped. Unterminated quotes throw
/// FormatError mentioning `source`.
CsvTable parse_csv(std::string_view text, std::string_view source, char delimiter = 0);

/// Case-insensitive lookup of header columns.
class ColumnMap {
 public:
  ColumnMap(const std::vector<std::string>& header, std::string source);

  /// Throws FormatError naming the missing column and the source.
  std::size_t require(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<std::string> header_;
  std::string source_;
};

/// Cell text or "" when the row is short.
std::string_view cell(const CsvRow& row, std::size_t column);
std::string_view cell(const CsvRow& row, std::optional<std::size_t> column);

/// Appends one record, quoting cells that need it, terminated by '\n'.
void append_csv_record(std::string& out, const std::vector<std::string>& cells, char delimiter = ',');

}  // namespace plowtrack
