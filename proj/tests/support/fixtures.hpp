#pragma once

// Synthetic road networks, tracks and reference implementations shared by the
// unit tests and the acceptance runner.

#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plowtrack/inventory.hpp"
#include "plowtrack/match.hpp"
#include "plowtrack/time.hpp"
#include "plowtrack/tracks.hpp"
#include "plowtrack/workorder.hpp"

namespace fixtures {

using namespace plowtrack;

inline const Coordinate kOrigin{39.77, -86.16};

/// Flat-earth offset, adequate for the few-kilometre fixtures used here.
Coordinate offset_m(const Coordinate& origin, double north_m, double east_m);

/// UTC instant from ISO-8601 text; throws on bad input.
Timestamp utc(std::string_view iso);
const LocalZone& indy();
LocalDate date(int y, unsigned m, unsigned d);

RoadSegment make_segment(std::string id, std::string_view route, std::vector<Coordinate> vertices,
                         PostRange posts = {});

/// A straight north-running route starting at `start` with markers 0..miles
/// placed every mile along it, cut into `pieces` equal inventory segments
/// "<prefix>-k" carrying their integer posts.
struct StraightRoute {
  std::vector<RoadSegment> segments;
  std::vector<MileMarker> markers;
};
StraightRoute straight_route(std::string_view route, const Coordinate& start, int miles, int pieces,
                             std::string_view prefix);

/// Random polyline network of `n` segments inside a square of half-size
/// `radius_m` around `center`, mixing interstate, US, state and local names.
std::vector<RoadSegment> random_network(std::mt19937_64& rng, std::size_t n, const Coordinate& center,
                                        double radius_m);

/// Random point within `spread_m` of a random vertex of a random segment,
/// or anywhere in the square with probability 1/4.
Coordinate random_probe(std::mt19937_64& rng, std::span<const RoadSegment> segments, const Coordinate& center,
                        double radius_m, double spread_m);

/// Exhaustive scan over every segment with the same hint and class rules as
/// the index-backed matcher.
std::pair<MatchedPoint, MatchState> brute_force_match(const RoadCatalog& catalog, const MatchState& state,
                                                      const GpsPoint& p, const MatchThresholds& th);

/// Evenly spaced fixes along `line`, starting at `start` every `step_s`.
std::vector<GpsPoint> drive(std::string_view vehicle, const Polyline& line, Timestamp start, int count,
                            int step_s);

/// Matched point on `road` with an explicit milepost, for computation
/// fixtures that bypass the matcher.
MatchedPoint on_road(std::string_view vehicle, Timestamp t, std::string_view road, std::optional<double> milepost,
                     RoadClass cls = RoadClass::Interstate);
MatchedPoint off_road(std::string_view vehicle, Timestamp t);

MatchedTracks tracks_of(std::vector<MatchedTrack> tracks);

/// "VehicleId,Timestamp,Lat,Lon" rows with UTC ISO timestamps.
std::string gps_csv(std::span<const GpsPoint> points);
std::string inventory_csv(std::span<const RoadSegment> segments);
std::string markers_csv(std::span<const MileMarker> markers);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, std::string_view text);

/// Runs the CLI with the given arguments and captures both streams.
struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};
CliRun run_cli(std::vector<std::string> args);

/// Small end-to-end data set on disk: a 10-mile I-65 in two inventory
/// segments with markers 0..10, a local road crossing it at mile 2, one
/// vehicle driving the interstate north and one driving the local road on
/// 2024-01-15, one corrupt GPS row, four work orders (2 MATCH, 1 MISMATCH,
/// 1 NO_DATA) and three activities.
struct Scenario {
  std::filesystem::path inventory, markers, gps, orders, activities;
};
Scenario write_scenario(const std::filesystem::path& dir);

/// Every regular file below `dir`, relative path to contents.
std::vector<std::pair<std::string, std::string>> snapshot(const std::filesystem::path& dir);

}  // namespace fixtures
