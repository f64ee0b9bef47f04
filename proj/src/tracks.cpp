#include "plowtrack/tracks.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <tuple>

#include "plowtrack/csv.hpp"
#include "plowtrack/io.hpp"

namespace plowtrack {

namespace {

struct ParsedRow {
  std::size_t line;
  GpsPoint point;
};

}  // namespace

IngestResult ingest_gps(std::string_view text, std::string_view source, const LocalZone& zone) {
  IngestResult result;
  const CsvTable table = parse_csv(text, source);
  if (table.header.empty()) return result;
  const ColumnMap cols(table.header, std::string(source));
  const auto c_vehicle = cols.require("VehicleId");
  const auto c_time = cols.require("Timestamp");
  const auto c_lat = cols.require("Lat");
  const auto c_lon = cols.require("Lon");

  std::map<std::string, std::vector<ParsedRow>> by_vehicle;
  for (const auto& row : table.rows) {
    ++result.rows;
    const std::string vehicle(trim(cell(row, c_vehicle)));
    if (vehicle.empty()) {
      result.rejects.push_back({row.line, "missing vehicle id"});
      continue;
    }
    const auto t = zone.parse(cell(row, c_time));
    if (!t) {
      result.rejects.push_back({row.line, "bad timestamp"});
      continue;
    }
    const auto lat = parse_double(cell(row, c_lat));
    const auto lon = parse_double(cell(row, c_lon));
    if (!lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      result.rejects.push_back({row.line, "bad coordinates"});
      continue;
    }
    by_vehicle[vehicle].push_back({row.line, GpsPoint{vehicle, *t, Coordinate(*lat, *lon)}});
  }

  for (auto& [vehicle, rows] : by_vehicle) {
    std::sort(rows.begin(), rows.end(), [](const ParsedRow& a, const ParsedRow& b) {
      return std::tie(a.point.time, a.point.location, a.line) < std::tie(b.point.time, b.point.location, b.line);
    });
    std::optional<GpsPoint> kept;
    for (const auto& r : rows) {
      if (kept && kept->time == r.point.time) {
        if (kept->location == r.point.location) {
          ++result.duplicates;
        } else {
          result.rejects.push_back({r.line, "timestamp collision"});
        }
        continue;
      }
      const LocalDate day = zone.day_of(r.point.time);
      auto [it, inserted] = result.tracks.try_emplace(DayKey{day, vehicle});
      if (inserted) {
        it->second.vehicle_id = vehicle;
        it->second.day = day;
      }
      it->second.points.push_back(r.point);
      kept = r.point;
    }
  }
  std::sort(result.rejects.begin(), result.rejects.end(),
            [](const RejectedRow& a, const RejectedRow& b) { return a.line < b.line; });
  return result;
}

std::string format_rejects(const std::vector<RejectedRow>& rejects) {
  std::string out;
  append_csv_record(out, {"Line", "Reason"});
  for (const auto& r : rejects) append_csv_record(out, {std::to_string(r.line), r.reason});
  return out;
}

SamplingStats sampling_stats(const DayTracks& tracks) {
  SamplingStats stats;
  stats.histogram = {{"<60s", 0}, {"60s", 0}, {"61-120s", 0}, {"121-300s", 0}, {"301-600s", 0}, {">600s", 0}};
  std::size_t exactly_one_minute = 0;
  std::size_t over_five_minutes = 0;
  long long min_gap = std::numeric_limits<long long>::max();

  for (const auto& [key, track] : tracks) {
    if (track.points.empty()) continue;
    ++stats.total_tracks;
    stats.total_points += track.points.size();
    for (std::size_t i = 1; i < track.points.size(); ++i) {
      const auto prev = std::chrono::round<std::chrono::seconds>(track.points[i - 1].time);
      const auto cur = std::chrono::round<std::chrono::seconds>(track.points[i].time);
      const long long gap = (cur - prev).count();
      ++stats.total_intervals;
      min_gap = std::min(min_gap, gap);
      if (gap == 60) ++exactly_one_minute;
      if (gap > 300) ++over_five_minutes;
      std::size_t bucket = 5;
      if (gap < 60) {
        bucket = 0;
      } else if (gap == 60) {
        bucket = 1;
      } else if (gap <= 120) {
        bucket = 2;
      } else if (gap <= 300) {
        bucket = 3;
      } else if (gap <= 600) {
        bucket = 4;
      }
      ++stats.histogram[bucket].count;
    }
  }
  if (stats.total_intervals > 0) {
    const auto n = static_cast<double>(stats.total_intervals);
    stats.min_interval_s = min_gap;
    stats.fraction_exactly_1min = static_cast<double>(exactly_one_minute) / n;
    stats.fraction_over_5min = static_cast<double>(over_five_minutes) / n;
  }
  return stats;
}

}  // namespace plowtrack
