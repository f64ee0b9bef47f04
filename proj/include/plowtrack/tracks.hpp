#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plowtrack/geo.hpp"
#include "plowtrack/time.hpp"

namespace plowtrack {

struct GpsPoint {
  std::string vehicle_id;
  Timestamp time;
  Coordinate location;

  friend bool operator==(const GpsPoint&, const GpsPoint&) = default;
};

/// (local day, vehicle) key of a day track.
struct DayKey {
  LocalDate day;
  std::string vehicle_id;

  friend bool operator==(const DayKey&, const DayKey&) = default;
  friend auto operator<=>(const DayKey& a, const DayKey& b) {
    if (auto c = std::chrono::sys_days{a.day} <=> std::chrono::sys_days{b.day}; c != 0) return c;
    return a.vehicle_id <=> b.vehicle_id;
  }
};

/// All points of one vehicle within one local midnight-to-midnight day,
/// strictly increasing in time.
struct DayTrack {
  std::string vehicle_id;
  LocalDate day;
  std::vector<GpsPoint> points;

  friend bool operator==(const DayTrack&, const DayTrack&) = default;
};

using DayTracks = std::map<DayKey, DayTrack>;

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  DayTracks tracks;
  std::vector<RejectedRow> rejects;  // sorted by line
  std::size_t rows = 0;
  std::size_t duplicates = 0;
};

/// Parses a GPS table (VehicleId, Timestamp, Lat, Lon; extra columns
/// ignored) and groups rows into day tracks in `zone`. Exact duplicate rows
/// are dropped; a second location at an already-seen (vehicle, timestamp)
/// is rejected as "timestamp collision" (the lexicographically smallest
/// (lat, lon) is kept, so the result does not depend on row order). Bad
/// rows are rejected, not fatal. Throws FormatError when a required column
/// is missing.
IngestResult ingest_gps(std::string_view text, std::string_view source, const LocalZone& zone);

/// Sidecar CSV: Line,Reason.
std::string format_rejects(const std::vector<RejectedRow>& rejects);

struct IntervalBucket {
  std::string label;
  std::size_t count = 0;

  friend bool operator==(const IntervalBucket&, const IntervalBucket&) = default;
};

struct SamplingStats {
  std::size_t total_points = 0;
  std::size_t total_tracks = 0;
  std::size_t total_intervals = 0;
  /// Smallest gap between adjacent points, whole seconds; 0 with no intervals.
  long long min_interval_s = 0;
  double fraction_exactly_1min = 0.0;
  double fraction_over_5min = 0.0;
  /// Fixed buckets: <60 s, =60 s, 61-120 s, 121-300 s, 301-600 s, >600 s.
  std::vector<IntervalBucket> histogram;
};

/// Gaps between adjacent points inside each day track, after rounding
/// timestamps to whole seconds. "Exactly one minute" is 60 s; "over five
/// minutes" is > 300 s.
SamplingStats sampling_stats(const DayTracks& tracks);

}  // namespace plowtrack
