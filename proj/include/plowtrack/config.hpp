#pragma once

#include <string>
#include <string_view>

#include "plowtrack/segment_time.hpp"
#include "plowtrack/thresholds.hpp"
#include "plowtrack/time.hpp"
#include "plowtrack/workorder.hpp"

namespace plowtrack {

/// Settings shared by every command. Paths are command arguments, not part
/// of the config.
struct RunConfig {
  std::string timezone = std::string(kDefaultTimeZone);
  int precision = 5;
  MatchThresholds thresholds;
  double cap_seconds = kDefaultDurationCapSeconds;
  double abs_tol_hours = 0.25;
  double rel_tol = 0.10;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;

  VerifyOptions verify_options() const;
  SegmentTimeOptions segment_time_options() const;

  /// key=value pairs in a fixed order, as echoed into reports.
  ReportMeta to_meta() const;

  bool operator==(const RunConfig&) const = default;
};

/// Applies one `key=value` setting. Throws std::invalid_argument on an
/// unknown key or unparsable value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines on top of the defaults. Blank lines and lines
/// starting with '#' are skipped. Throws FormatError with "source:line: ".
RunConfig parse_config(std::string_view text, std::string_view source);

}  // namespace plowtrack
