#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace plowtrack {

/// Absolute instant, millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Local calendar date (the "day" of a day track).
using LocalDate = std::chrono::year_month_day;

inline constexpr std::string_view kDefaultTimeZone = "America/Indiana/Indianapolis";

/// Whole Unix seconds, truncated toward negative infinity.
std::int64_t unix_seconds(Timestamp t);

/// "YYYY-MM-DD" or "MM/DD/YYYY" (optionally followed by a time, which is
/// ignored). Returns nullopt on anything else or an invalid date.
std::optional<LocalDate> parse_date(std::string_view text);
std::string format_date(LocalDate d);

/// Whole days from `a` to `b`.
int days_between(LocalDate a, LocalDate b);

/// An IANA time zone loaded from the system database.
class LocalZone {
 public:
  /// Throws std::invalid_argument for an unknown zone name.
  static LocalZone load(std::string_view name);

  const std::string& name() const { return name_; }

  /// Local calendar day containing `t`.
  LocalDate day_of(Timestamp t) const;

  /// Start of the local day (local midnight) as an instant.
  Timestamp start_of(LocalDate d) const;

  /// Accepts ISO-8601 with or without an offset ('T' or space separator,
  /// optional fractional seconds, 'Z' or +hh:mm) and "MM/DD/YYYY HH:MM[:SS]".
  /// Text without an offset is interpreted in this zone.
  std::optional<Timestamp> parse(std::string_view text) const;

  /// ISO-8601 with the zone's offset, e.g. 2024-01-15T06:00:00-05:00.
  std::string format(Timestamp t) const;

 private:
  struct Impl;
  LocalZone(std::string name, std::shared_ptr<const Impl> impl);

  std::string name_;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace plowtrack
