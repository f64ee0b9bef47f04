#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace plowtrack {

/// Malformed input. The message names the file (and line, when known).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `contents` to a sibling temp file and renames it over `path`, so a
/// reader never observes a partially written report.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Whole-file read. Throws FormatError if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

/// Fixed-point text with `decimals` digits.
std::string format_fixed(double v, int decimals);

/// Strict numeric parsers; surrounding whitespace is ignored, anything else
/// left over fails.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Replaces characters outside [A-Za-z0-9._-] with '_' for use in file names.
std::string file_safe(std::string_view name);

}  // namespace plowtrack
