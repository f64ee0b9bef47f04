#include "plowtrack/config.hpp"

#include <cmath>
#include <stdexcept>

#include "plowtrack/inventory.hpp"
#include "plowtrack/io.hpp"

namespace plowtrack {

namespace {

double positive(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v || !std::isfinite(*v) || *v <= 0.0) {
    throw std::invalid_argument(std::string(key) + ": expected a positive number, got '" + std::string(value) + "'");
  }
  return *v;
}

double non_negative(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v || !std::isfinite(*v) || *v < 0.0) {
    throw std::invalid_argument(std::string(key) + ": expected a non-negative number, got '" + std::string(value) +
                                "'");
  }
  return *v;
}

}  // namespace

void RunConfig::validate() const {
  LocalZone::load(timezone);
  if (precision < kMinIndexPrecision || precision > kMaxIndexPrecision) {
    throw std::invalid_argument("precision: must be in [" + std::to_string(kMinIndexPrecision) + ", " +
                                std::to_string(kMaxIndexPrecision) + "]");
  }
  thresholds.validate();
  if (!(cap_seconds > 0.0) || !std::isfinite(cap_seconds)) throw std::invalid_argument("cap_seconds: must be positive");
  if (!(abs_tol_hours >= 0.0) || !std::isfinite(abs_tol_hours)) {
    throw std::invalid_argument("abs_tol: must be non-negative");
  }
  if (!(rel_tol >= 0.0) || !std::isfinite(rel_tol)) throw std::invalid_argument("rel_tol: must be non-negative");
}

VerifyOptions RunConfig::verify_options() const { return {abs_tol_hours, rel_tol, segment_time_options()}; }

SegmentTimeOptions RunConfig::segment_time_options() const { return {cap_seconds}; }

ReportMeta RunConfig::to_meta() const {
  return {{"timezone", timezone},
          {"precision", std::to_string(precision)},
          {"interstate_m", format_double(thresholds.interstate_m)},
          {"state_m", format_double(thresholds.state_m)},
          {"local_m", format_double(thresholds.local_m)},
          {"hint_m", format_double(thresholds.hint_m)},
          {"cap_seconds", format_double(cap_seconds)},
          {"abs_tol", format_double(abs_tol_hours)},
          {"rel_tol", format_double(rel_tol)}};
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "timezone") {
    if (value.empty()) throw std::invalid_argument("timezone: empty");
    config.timezone = std::string(value);
  } else if (key == "precision") {
    const auto v = parse_integer(value);
    if (!v) throw std::invalid_argument("precision: expected an integer, got '" + std::string(value) + "'");
    config.precision = static_cast<int>(*v);
  } else if (key == "interstate_m") {
    config.thresholds.interstate_m = positive(key, value);
  } else if (key == "state_m") {
    config.thresholds.state_m = positive(key, value);
  } else if (key == "local_m") {
    config.thresholds.local_m = positive(key, value);
  } else if (key == "hint_m") {
    config.thresholds.hint_m = positive(key, value);
  } else if (key == "cap_seconds") {
    config.cap_seconds = positive(key, value);
  } else if (key == "abs_tol") {
    config.abs_tol_hours = non_negative(key, value);
  } else if (key == "rel_tol") {
    config.rel_tol = non_negative(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto prefix = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError(prefix + "expected key=value");
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw FormatError(prefix + e.what());
    }
  }
  return config;
}

}  // namespace plowtrack
