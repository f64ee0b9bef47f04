#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cli.hpp"
#include "plowtrack/csv.hpp"
#include "plowtrack/io.hpp"

namespace fixtures {

namespace fs = std::filesystem;

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace

Coordinate offset_m(const Coordinate& origin, double north_m, double east_m) {
  const double lat = origin.lat() + north_m / kMetersPerDegree;
  const double lon = origin.lon() + east_m / (kMetersPerDegree * std::cos(origin.lat() * std::numbers::pi / 180.0));
  return Coordinate(lat, lon);
}

const LocalZone& indy() {
  static const LocalZone zone = LocalZone::load("America/Indiana/Indianapolis");
  return zone;
}

Timestamp utc(std::string_view iso) {
  static const LocalZone zone = LocalZone::load("UTC");
  const auto t = zone.parse(iso);
  if (!t) throw std::invalid_argument("bad fixture timestamp " + std::string(iso));
  return *t;
}

LocalDate date(int y, unsigned m, unsigned d) {
  return LocalDate{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

RoadSegment make_segment(std::string id, std::string_view route, std::vector<Coordinate> vertices, PostRange posts) {
  return RoadSegment{std::move(id), road_name_to_type(route), posts, Polyline(std::move(vertices))};
}

StraightRoute straight_route(std::string_view route, const Coordinate& start, int miles, int pieces,
                             std::string_view prefix) {
  if (pieces <= 0 || miles % pieces != 0) throw std::invalid_argument("pieces must divide miles");
  StraightRoute out;
  const RouteRef ref = road_name_to_type(route);
  for (int k = 0; k <= miles; ++k) {
    out.markers.push_back(MileMarker{ref, k, offset_m(start, k * kMetersPerMile, 0.0)});
  }
  const int per = miles / pieces;
  for (int j = 0; j < pieces; ++j) {
    std::vector<Coordinate> vertices;
    for (int k = j * per; k <= (j + 1) * per; ++k) vertices.push_back(out.markers[static_cast<std::size_t>(k)].location);
    PostRange posts;
    posts.start_post = j * per;
    posts.end_post = (j + 1) * per;
    out.segments.push_back(make_segment(std::string(prefix) + "-" + std::to_string(j), route, std::move(vertices), posts));
  }
  return out;
}

std::vector<RoadSegment> random_network(std::mt19937_64& rng, std::size_t n, const Coordinate& center,
                                        double radius_m) {
  static const std::vector<std::string> names = {"I-65",    "I-70",    "US-31",        "US-40",        "SR-37",
                                                 "SR-67",   "Main St", "Oak Ave",      "County Rd 100", "Elm St",
                                                 "Pine Rd", "SR-135",  "Washington St"};
  std::vector<RoadSegment> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& name = names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
    const int vertex_count = std::uniform_int_distribution<int>(2, 6)(rng);
    double north = uniform(rng, -radius_m, radius_m);
    double east = uniform(rng, -radius_m, radius_m);
    double heading = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::vector<Coordinate> vertices{offset_m(center, north, east)};
    for (int v = 1; v < vertex_count; ++v) {
      heading += uniform(rng, -0.8, 0.8);
      const double step = uniform(rng, 40.0, 800.0);
      north += step * std::cos(heading);
      east += step * std::sin(heading);
      vertices.push_back(offset_m(center, north, east));
    }
    char id[16];
    std::snprintf(id, sizeof id, "S%04zu", i);
    out.push_back(make_segment(id, name, std::move(vertices)));
  }
  return out;
}

Coordinate random_probe(std::mt19937_64& rng, std::span<const RoadSegment> segments, const Coordinate& center,
                        double radius_m, double spread_m) {
  if (segments.empty() || std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
    return offset_m(center, uniform(rng, -radius_m, radius_m), uniform(rng, -radius_m, radius_m));
  }
  const auto& seg = segments[std::uniform_int_distribution<std::size_t>(0, segments.size() - 1)(rng)];
  const Coordinate base = seg.geometry.point_at(uniform(rng, 0.0, 1.0));
  return offset_m(base, uniform(rng, -spread_m, spread_m), uniform(rng, -spread_m, spread_m));
}

std::pair<MatchedPoint, MatchState> brute_force_match(const RoadCatalog& catalog, const MatchState& state,
                                                      const GpsPoint& p, const MatchThresholds& th) {
  const auto emit = [&](const RoadSegment& seg, const PolylineProjection& proj) {
    MatchedPoint mp;
    mp.point = p;
    mp.road = seg.segment_id;
    mp.road_class = seg.route.valid() ? seg.route.road_class : RoadClass::LocalRoad;
    mp.snap_distance_m = proj.distance_m;
    mp.milepost = milepost_of(catalog, seg.segment_id, proj.arc_fraction);
    return std::pair{mp, MatchState{seg.segment_id}};
  };

  if (state.previous_road) {
    if (const RoadSegment* hint = catalog.find(*state.previous_road)) {
      const auto proj = point_to_polyline(p.location, hint->geometry);
      if (proj.distance_m <= th.hint_m) return emit(*hint, proj);
    }
  }

  for (const RoadClass cls : {RoadClass::Interstate, RoadClass::StateRoad, RoadClass::LocalRoad}) {
    const double limit = cls == RoadClass::Interstate ? th.interstate_m
                         : cls == RoadClass::StateRoad ? th.state_m
                                                       : th.local_m;
    const RoadSegment* best = nullptr;
    PolylineProjection best_proj{std::numeric_limits<double>::infinity(), p.location, 0.0};
    for (const auto& seg : catalog.segments()) {
      const RoadClass seg_cls = seg.route.valid() ? seg.route.road_class : RoadClass::LocalRoad;
      if (seg_cls != cls) continue;
      const auto proj = point_to_polyline(p.location, seg.geometry);
      if (proj.distance_m > limit) continue;
      if (best == nullptr || proj.distance_m < best_proj.distance_m ||
          (proj.distance_m == best_proj.distance_m && seg.segment_id < best->segment_id)) {
        best = &seg;
        best_proj = proj;
      }
    }
    if (best != nullptr) return emit(*best, best_proj);
  }
  MatchedPoint off;
  off.point = p;
  return {off, MatchState{}};
}

std::vector<GpsPoint> drive(std::string_view vehicle, const Polyline& line, Timestamp start, int count, int step_s) {
  std::vector<GpsPoint> out;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(GpsPoint{std::string(vehicle), start + std::chrono::seconds(i * step_s), line.point_at(f)});
  }
  return out;
}

MatchedPoint on_road(std::string_view vehicle, Timestamp t, std::string_view road, std::optional<double> milepost,
                     RoadClass cls) {
  MatchedPoint mp;
  mp.point = GpsPoint{std::string(vehicle), t, kOrigin};
  mp.road = std::string(road);
  mp.road_class = cls;
  mp.milepost = milepost;
  mp.snap_distance_m = 0.0;
  return mp;
}

MatchedPoint off_road(std::string_view vehicle, Timestamp t) {
  MatchedPoint mp;
  mp.point = GpsPoint{std::string(vehicle), t, kOrigin};
  return mp;
}

MatchedTracks tracks_of(std::vector<MatchedTrack> tracks) {
  MatchedTracks out;
  for (auto& t : tracks) {
    DayKey key{t.day, t.vehicle_id};
    out.emplace(std::move(key), std::move(t));
  }
  return out;
}

std::string gps_csv(std::span<const GpsPoint> points) {
  static const LocalZone zone = LocalZone::load("UTC");
  std::string out = "VehicleId,Timestamp,Lat,Lon\n";
  for (const auto& p : points) {
    append_csv_record(out, {p.vehicle_id, zone.format(p.time), format_double(p.location.lat()),
                            format_double(p.location.lon())});
  }
  return out;
}

std::string inventory_csv(std::span<const RoadSegment> segments) {
  std::string out = "SegmentId,RouteRef,StartPost,EndPost,StartOffset,EndOffset,Geometry\n";
  for (const auto& s : segments) {
    std::string wkt = "LINESTRING(";
    for (std::size_t i = 0; i < s.geometry.size(); ++i) {
      if (i > 0) wkt += ", ";
      wkt += format_double(s.geometry[i].lon()) + " " + format_double(s.geometry[i].lat());
    }
    wkt += ")";
    const auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    const auto opt_dbl = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    append_csv_record(out, {s.segment_id, s.route.raw, opt_int(s.posts.start_post), opt_int(s.posts.end_post),
                            opt_dbl(s.posts.start_offset), opt_dbl(s.posts.end_offset), wkt});
  }
  return out;
}

std::string markers_csv(std::span<const MileMarker> markers) {
  std::string out = "RouteRef,Post,Lat,Lon\n";
  for (const auto& m : markers) {
    append_csv_record(out, {m.route.raw, std::to_string(m.post), format_double(m.location.lat()),
                            format_double(m.location.lon())});
  }
  return out;
}

TempDir::TempDir(std::string_view tag) {
  static std::mt19937_64 rng{std::random_device{}()};
  for (;;) {
    path_ = fs::temp_directory_path() / ("plowtrack-" + std::string(tag) + "-" + std::to_string(rng() % 1000000000));
    if (fs::create_directories(path_)) return;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "plowtrack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = plowtrack::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).generic_string(), read_file(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fixtures

namespace fixtures {

Scenario write_scenario(const fs::path& dir) {
  Scenario s{dir / "inventory.csv", dir / "markers.csv", dir / "gps.csv", dir / "orders.csv", dir / "activities.csv"};
  const auto route = straight_route("I-65", kOrigin, 10, 2, "I65");
  std::vector<RoadSegment> segments = route.segments;
  const Coordinate crossing = offset_m(kOrigin, 2 * kMetersPerMile, 0);
  segments.push_back(make_segment("MAIN-1", "Main St", {offset_m(crossing, 0, -3000), offset_m(crossing, 0, 3000)}));
  write_text(s.inventory, inventory_csv(segments));
  write_text(s.markers, markers_csv(route.markers));

  // Interstate: mileposts 0.125, 0.375, ... 9.875 every minute, so no
  // sample sits on a post boundary.
  const Timestamp start = utc("2024-01-15T12:00:00Z");
  const Polyline i65({offset_m(kOrigin, 0.125 * kMetersPerMile, 0), offset_m(kOrigin, 9.875 * kMetersPerMile, 0)});
  std::vector<GpsPoint> points = drive("T1", i65, start, 40, 60);
  const Polyline main({offset_m(crossing, 0, 300), offset_m(crossing, 0, 2100)});
  const auto local = drive("T2", main, start, 10, 60);
  points.insert(points.end(), local.begin(), local.end());
  std::string gps = gps_csv(points);
  gps += "T9,not-a-time,39.7,-86.1\n";
  write_text(s.gps, gps);

  write_text(s.orders,
             "WOId,VehicleId,Date,RouteRef,StartPost,EndPost,StartOffset,EndOffset,ReportedHrs\n"
             "W1,T1,2024-01-15,I-65,0,5,,,0.33\n"
             "W2,T1,2024-01-15,I 65,5,10,,,0.30\n"
             "W3,T1,2024-01-16,I-65,0,5,,,2.00\n"
             "W4,T2,2024-01-15,Main St,,,,,5.00\n");
  write_text(s.activities,
             "VehicleId,Date,RouteRef,StartPost,EndPost\n"
             "T1,2024-01-15,I-65,,\n"
             "T2,2024-01-15,main st,,\n"
             "T1,2024-01-16,I-65,,\n");
  return s;
}

}  // namespace fixtures
