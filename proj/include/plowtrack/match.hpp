#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plowtrack/inventory.hpp"
#include "plowtrack/thresholds.hpp"
#include "plowtrack/tracks.hpp"

namespace plowtrack {

/// A GPS point with its selected road. `road` empty means off-road, in which
/// case class, milepost and snap distance are empty too. A matched road may
/// still lack a milepost when its route has fewer than two markers.
struct MatchedPoint {
  GpsPoint point;
  std::optional<std::string> road;
  std::optional<RoadClass> road_class;
  std::optional<double> milepost;
  std::optional<double> snap_distance_m;

  bool off_road() const { return !road.has_value(); }
  friend bool operator==(const MatchedPoint&, const MatchedPoint&) = default;
};

/// The hint carried from one point to the next.
struct MatchState {
  std::optional<std::string> previous_road;
  friend bool operator==(const MatchState&, const MatchState&) = default;
};

/// Selects the road for one point. Order: the hint road if within hint_m,
/// else the closest interstate within interstate_m, else the closest state
/// road within state_m, else the closest local road within local_m, else
/// off-road. Candidates come only from the point's tile neighbourhood;
/// same-class ties go to the smaller segment id. The returned state holds
/// the selected road (empty for off-road).
std::pair<MatchedPoint, MatchState> match_point(const RoadIndex& idx, const MatchState& state, const GpsPoint& p,
                                                const MatchThresholds& th);

/// Folds match_point over the track in time order, starting without a hint.
std::vector<MatchedPoint> match_track(const RoadIndex& idx, const DayTrack& track, const MatchThresholds& th);

/// Fractional milepost of a position on a segment, given as an arc fraction
/// of the segment's geometry. Linear in frame arc length between the two
/// markers whose projections bracket it; clamped to the first/last marker
/// post outside them. Empty when the route has fewer than two markers.
std::optional<double> milepost_of(const RoadCatalog& catalog, std::string_view segment_id, double arc_fraction);

// Matched-track interchange --------------------------------------------------

struct MatchedTrack {
  LocalDate day;
  std::string vehicle_id;
  std::vector<MatchedPoint> points;

  friend bool operator==(const MatchedTrack&, const MatchedTrack&) = default;
};

using MatchedTracks = std::map<DayKey, MatchedTrack>;

/// {"day","vehicle_id","points":[{"t","lat","lon","road","class","milepost","snap_m"}]}
/// with times formatted in `zone`; absent values are null.
std::string matched_track_to_json(const MatchedTrack& track, const LocalZone& zone);

/// Throws FormatError mentioning `source` on malformed input.
MatchedTrack matched_track_from_json(std::string_view text, std::string_view source);

/// "<day>_<vehicle>.json", vehicle made file-name safe.
std::string matched_track_file_name(const MatchedTrack& track);

/// Loads every *.json under `directory` that parses as a matched track.
/// Throws FormatError if the directory does not exist.
MatchedTracks read_matched_tracks(const std::filesystem::path& directory);

}  // namespace plowtrack
