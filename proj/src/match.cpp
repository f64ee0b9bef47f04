#include "plowtrack/match.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "plowtrack/io.hpp"

namespace plowtrack {

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

double class_threshold(RoadClass c, const MatchThresholds& th) {
  switch (c) {
    case RoadClass::Interstate:
      return th.interstate_m;
    case RoadClass::StateRoad:
      return th.state_m;
    case RoadClass::LocalRoad:
      return th.local_m;
  }
  return th.local_m;
}

RoadClass class_of(const RoadSegment& s) { return s.route.valid() ? s.route.road_class : RoadClass::LocalRoad; }

// Lower bound on the great-circle distance from p to any point of the box.
// Uses |dlat| and the longitude gap scaled by the smaller cosine; the cubic
// term keeps sin(x) >= x - x^3/6 honest.
double distance_lower_bound(const Coordinate& p, double cos_p, const SegmentEnvelope& env) {
  const GeoBox& b = env.box;
  const double dlat = std::max({0.0, b.lat_min - p.lat(), p.lat() - b.lat_max});
  double dlon = 0.0;
  if (b.lon_max - b.lon_min < 180.0) {
    const double west = lon_delta(p.lon(), b.lon_min);
    const double east = lon_delta(b.lon_max, p.lon());
    if (west > 0.0) dlon = west;
    if (east > 0.0) dlon = std::max(dlon, east);
  }
  const double lat_bound = dlat * kMetersPerDegree;
  const double x = dlon * std::numbers::pi / 180.0;
  const double lon_bound =
      kEarthRadiusM * std::sqrt(std::max(0.0, cos_p * env.cos_max_lat)) * x * std::max(0.0, 1.0 - x * x / 24.0);
  return std::max(lat_bound, lon_bound);
}

struct Best {
  std::optional<std::uint32_t> index;
  double distance = std::numeric_limits<double>::infinity();
  double arc_fraction = 0.0;

  void offer(std::uint32_t i, const PolylineProjection& proj, const RoadCatalog& cat) {
    if (!index || proj.distance_m < distance ||
        (proj.distance_m == distance && cat.segment(i).segment_id < cat.segment(*index).segment_id)) {
      index = i;
      distance = proj.distance_m;
      arc_fraction = proj.arc_fraction;
    }
  }
};

MatchedPoint make_matched(const RoadCatalog& cat, const GpsPoint& p, std::uint32_t index, double distance,
                          double arc_fraction) {
  const RoadSegment& seg = cat.segment(index);
  MatchedPoint out;
  out.point = p;
  out.road = seg.segment_id;
  out.road_class = class_of(seg);
  out.snap_distance_m = distance;
  out.milepost = milepost_of(cat, seg.segment_id, arc_fraction);
  return out;
}

std::pair<MatchedPoint, MatchState> select_road(const RoadIndex& idx, const MatchState& state, const GpsPoint& p,
                                                const MatchThresholds& th, const std::vector<std::uint32_t>& candidates) {
  const RoadCatalog& cat = idx.catalog();

  if (state.previous_road) {
    if (const auto hint = cat.index_of(*state.previous_road)) {
      const auto proj = point_to_polyline(p.location, cat.segment(*hint).geometry);
      if (proj.distance_m <= th.hint_m) {
        return {make_matched(cat, p, *hint, proj.distance_m, proj.arc_fraction), MatchState{*state.previous_road}};
      }
    }
  }

  const double cos_p = std::cos(p.location.lat() * std::numbers::pi / 180.0);
  Best best[3];
  for (const auto i : candidates) {
    const RoadClass c = class_of(cat.segment(i));
    const double limit = class_threshold(c, th);
    if (distance_lower_bound(p.location, cos_p, cat.envelope(i)) > limit) continue;
    const auto proj = point_to_polyline(p.location, cat.segment(i).geometry);
    if (proj.distance_m <= limit) best[static_cast<int>(c)].offer(i, proj, cat);
  }

  for (const auto& b : best) {
    if (b.index) {
      MatchedPoint mp = make_matched(cat, p, *b.index, b.distance, b.arc_fraction);
      MatchState next{mp.road};
      return {std::move(mp), std::move(next)};
    }
  }
  MatchedPoint off;
  off.point = p;
  return {std::move(off), MatchState{}};
}

}  // namespace

std::pair<MatchedPoint, MatchState> match_point(const RoadIndex& idx, const MatchState& state, const GpsPoint& p,
                                                const MatchThresholds& th) {
  return select_road(idx, state, p, th, candidate_segments(idx, p.location));
}

std::vector<MatchedPoint> match_track(const RoadIndex& idx, const DayTrack& track, const MatchThresholds& th) {
  std::vector<MatchedPoint> out;
  out.reserve(track.points.size());
  MatchState state;
  // Consecutive samples usually share a cell; reuse its candidate list.
  std::optional<GeohashId> cached_cell;
  std::vector<std::uint32_t> cached;
  for (const auto& p : track.points) {
    const GeohashId cell = geohash_encode(p.location, idx.precision());
    if (!cached_cell || *cached_cell != cell) {
      cached = candidate_segments(idx, p.location);
      cached_cell = cell;
    }
    auto [mp, next] = select_road(idx, state, p, th, cached);
    out.push_back(std::move(mp));
    state = std::move(next);
  }
  return out;
}

std::optional<double> milepost_of(const RoadCatalog& catalog, std::string_view segment_id, double arc_fraction) {
  const auto index = catalog.index_of(segment_id);
  if (!index) return std::nullopt;
  const RoadSegment& seg = catalog.segment(*index);
  if (!seg.route.valid()) return std::nullopt;
  const auto markers = catalog.markers(seg.route.canonical_name);
  const RouteFrame* frame = catalog.frame(seg.route.canonical_name);
  const auto placement = catalog.placement(*index);
  if (markers.size() < 2 || frame == nullptr || !placement) return std::nullopt;

  const double f = std::clamp(arc_fraction, 0.0, 1.0);
  const auto& arcs = frame->marker_arc_m;
  // Markers may run against the digitized direction of the frame.
  const double dir = arcs.back() >= arcs.front() ? 1.0 : -1.0;
  const double q = dir * (placement->begin_m + f * (placement->end_m - placement->begin_m));
  const auto arc = [&](std::size_t k) { return dir * arcs[k]; };

  const std::size_t n = markers.size();
  if (q <= arc(0)) return static_cast<double>(markers.front().post);
  if (q >= arc(n - 1)) return static_cast<double>(markers.back().post);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a0 = arc(k), a1 = arc(k + 1);
    if (a0 <= q && q <= a1) {
      if (a1 <= a0) return static_cast<double>(markers[k].post);
      return markers[k].post + (q - a0) / (a1 - a0) * (markers[k + 1].post - markers[k].post);
    }
  }
  // Marker projections out of post order: fall back to the nearest marker.
  std::size_t nearest = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(arc(k) - q) < std::abs(arc(nearest) - q)) nearest = k;
  }
  return static_cast<double>(markers[nearest].post);
}

// Interchange -----------------------------------------------------------------

namespace {

using Json = nlohmann::ordered_json;

template <typename T>
Json or_null(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string matched_track_to_json(const MatchedTrack& track, const LocalZone& zone) {
  Json points = Json::array();
  for (const auto& mp : track.points) {
    points.push_back(Json{{"t", zone.format(mp.point.time)},
                          {"lat", mp.point.location.lat()},
                          {"lon", mp.point.location.lon()},
                          {"road", or_null(mp.road)},
                          {"class", mp.road_class ? Json(std::string(to_string(*mp.road_class))) : Json(nullptr)},
                          {"milepost", or_null(mp.milepost)},
                          {"snap_m", or_null(mp.snap_distance_m)}});
  }
  const Json doc{{"day", format_date(track.day)}, {"vehicle_id", track.vehicle_id}, {"points", std::move(points)}};
  return doc.dump() + "\n";
}

MatchedTrack matched_track_from_json(std::string_view text, std::string_view source) {
  static const LocalZone utc = LocalZone::load("UTC");
  try {
    const Json j = Json::parse(text);
    MatchedTrack out;
    const auto day = parse_date(j.at("day").get<std::string>());
    if (!day) throw FormatError(std::string(source) + ": bad day");
    out.day = *day;
    out.vehicle_id = j.at("vehicle_id").get<std::string>();
    for (const auto& p : j.at("points")) {
      MatchedPoint mp;
      const auto t = utc.parse(p.at("t").get<std::string>());
      if (!t) throw FormatError(std::string(source) + ": bad timestamp " + p.at("t").dump());
      mp.point = GpsPoint{out.vehicle_id, *t, Coordinate(p.at("lat").get<double>(), p.at("lon").get<double>())};
      if (!p.at("road").is_null()) mp.road = p.at("road").get<std::string>();
      if (!p.at("class").is_null()) {
        mp.road_class = road_class_from_string(p.at("class").get<std::string>());
        if (!mp.road_class) throw FormatError(std::string(source) + ": unknown road class");
      }
      if (!p.at("milepost").is_null()) mp.milepost = p.at("milepost").get<double>();
      if (!p.at("snap_m").is_null()) mp.snap_distance_m = p.at("snap_m").get<double>();
      if (mp.road.has_value() != mp.road_class.has_value() || (!mp.road && mp.milepost)) {
        throw FormatError(std::string(source) + ": off-road point carries road data");
      }
      out.points.push_back(std::move(mp));
    }
    return out;
  } catch (const Json::exception& e) {
    throw FormatError(std::string(source) + ": malformed matched track: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(source) + ": " + e.what());
  }
}

std::string matched_track_file_name(const MatchedTrack& track) {
  return format_date(track.day) + "_" + file_safe(track.vehicle_id) + ".json";
}

MatchedTracks read_matched_tracks(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw FormatError(directory.string() + ": matched-track directory not found");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  MatchedTracks out;
  for (const auto& f : files) {
    MatchedTrack t = matched_track_from_json(read_file(f), f.string());
    DayKey key{t.day, t.vehicle_id};
    if (!out.emplace(std::move(key), std::move(t)).second) {
      throw FormatError(f.string() + ": duplicate (day, vehicle) track");
    }
  }
  return out;
}

}  // namespace plowtrack
