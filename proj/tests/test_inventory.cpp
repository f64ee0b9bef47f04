#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "plowtrack/inventory.hpp"
#include "plowtrack/io.hpp"

using namespace plowtrack;
using fixtures::offset_m;

TEST_CASE("route refs") {
  struct Case {
    const char* raw;
    RoadClass cls;
    const char* name;
  };
  const Case cases[] = {
      {"I-65", RoadClass::Interstate, "I-65"},   {"i 70", RoadClass::Interstate, "I-70"},
      {"I65", RoadClass::Interstate, "I-65"},    {"sr 26", RoadClass::StateRoad, "SR-26"},
      {"SR-37", RoadClass::StateRoad, "SR-37"},  {"S.R. 9", RoadClass::StateRoad, "SR-9"},
      {"US 31", RoadClass::StateRoad, "US-31"},  {"us-40", RoadClass::StateRoad, "US-40"},
      {"Main St", RoadClass::LocalRoad, "MAIN ST"}, {"  county   rd 100 ", RoadClass::LocalRoad, "COUNTY RD 100"},
      {"Indiana Ave", RoadClass::LocalRoad, "INDIANA AVE"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.raw);
    const RouteRef r = road_name_to_type(c.raw);
    CHECK(r.valid());
    CHECK(r.road_class == c.cls);
    CHECK(r.canonical_name == c.name);
    CHECK(r.raw == c.raw);
  }
  CHECK_FALSE(road_name_to_type("").valid());
  CHECK_FALSE(road_name_to_type("   ").valid());
}

TEST_CASE("post ranges") {
  const PostRange r = parse_post_range("10", "20", "-0.3", "0.4");
  CHECK(r.start_post == 10);
  CHECK(r.end_post == 20);
  CHECK(r.start_offset == -0.3);
  CHECK(r.end_offset == 0.4);
  CHECK(r.has_bounds());
  CHECK_FALSE(parse_post_range("10", "", "", "").has_bounds());
  CHECK_THROWS_AS(parse_post_range("", "20", "0.5", ""), std::invalid_argument);
  CHECK_THROWS_AS(parse_post_range("10", "20", "1.0", ""), std::invalid_argument);
  CHECK_THROWS_AS(parse_post_range("20", "10", "", ""), std::invalid_argument);
  CHECK_THROWS_AS(parse_post_range("10", "10", "0.5", "-0.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_post_range("x", "10", "", ""), std::invalid_argument);
}

TEST_CASE("inventory and marker parsing") {
  const std::string inv =
      "SegmentId,RouteRef,StartPost,EndPost,StartOffset,EndOffset,Geometry\n"
      "A,I-65,10,12,,0.2,\"LINESTRING(-86.1 39.7, -86.1 39.72)\"\n"
      "B,Main St,,,,,\"LINESTRING (-86.2 39.7,-86.21 39.7,-86.22 39.71)\"\n";
  const auto segs = parse_inventory(inv, "inv.csv");
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].segment_id == "A");
  CHECK(segs[0].posts.end_offset == 0.2);
  CHECK(segs[0].geometry[0].lon() == -86.1);
  CHECK(segs[0].geometry[1].lat() == 39.72);
  CHECK(segs[1].geometry.size() == 3);
  CHECK_FALSE(segs[1].posts.start_post.has_value());

  const std::string bad = "SegmentId,RouteRef,StartPost,EndPost,StartOffset,EndOffset,Geometry\n"
                          "A,I-65,,,,,\"LINESTRING(-86.1 39.7)\"\n";
  try {
    parse_inventory(bad, "bad.csv");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("bad.csv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_inventory("SegmentId,RouteRef\nA,I-65\n", "short.csv"), FormatError);

  const auto markers = parse_markers("RouteRef,Post,Lat,Lon\nI-65,10,39.7,-86.1\ni 65,11,39.71,-86.1\n", "m.csv");
  REQUIRE(markers.size() == 2);
  CHECK(markers[1].route.canonical_name == "I-65");
  CHECK_THROWS_AS(parse_markers("RouteRef,Post,Lat,Lon\nI-65,-1,39.7,-86.1\n", "m.csv"), FormatError);
}

TEST_CASE("catalog rejects duplicates and sorts markers") {
  const auto seg = fixtures::make_segment("A", "I-65", {fixtures::kOrigin, offset_m(fixtures::kOrigin, 100, 0)});
  CHECK_THROWS_AS(RoadCatalog({seg, seg}, {}), FormatError);

  const RouteRef ref = road_name_to_type("I-65");
  std::vector<MileMarker> markers{{ref, 2, offset_m(fixtures::kOrigin, 2 * kMetersPerMile, 0)},
                                  {ref, 0, fixtures::kOrigin},
                                  {ref, 1, offset_m(fixtures::kOrigin, kMetersPerMile, 0)}};
  const RoadCatalog cat({seg}, markers);
  const auto sorted = cat.markers("I-65");
  REQUIRE(sorted.size() == 3);
  CHECK(sorted[0].post == 0);
  CHECK(sorted[2].post == 2);
  markers.push_back(markers.front());
  CHECK_THROWS_AS(RoadCatalog({seg}, markers), FormatError);
}

TEST_CASE("segment inside one cell is registered only there") {
  const GeoBox cell = geohash_decode(geohash_encode(fixtures::kOrigin, 5));
  const Coordinate c = cell.center();
  const auto seg = fixtures::make_segment("A", "Main St", {c, offset_m(c, 50, 50)});
  const TiledIndex idx = build_index({seg}, {}, 5);
  REQUIRE(idx.tiles().size() == 1);
  CHECK(idx.tiles().begin()->first == geohash_encode(c, 5));
  CHECK(idx.tiles().begin()->second.segment_ids == std::vector<std::string>{"A"});
}

TEST_CASE("segment crossing a cell edge is registered in both cells") {
  const GeoBox cell = geohash_decode(geohash_encode(fixtures::kOrigin, 5));
  const Coordinate west(cell.center().lat(), cell.lon_max - 0.005);
  const Coordinate east(cell.center().lat(), cell.lon_max + 0.005);
  const TiledIndex idx = build_index({fixtures::make_segment("A", "Main St", {west, east})}, {}, 5);
  CHECK(idx.tiles().contains(geohash_encode(west, 5)));
  CHECK(idx.tiles().contains(geohash_encode(east, 5)));
  CHECK_THROWS_AS(build_index({}, {}, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_index({}, {}, 8), std::invalid_argument);
}

TEST_CASE("index covers every vertex and every segment within the threshold") {
  std::mt19937_64 rng(21);
  for (int net = 0; net < 10; ++net) {
    const auto segments = fixtures::random_network(rng, 150, fixtures::kOrigin, 15000.0);
    const int precision = 4 + net % 4;
    const TiledIndex idx = build_index(segments, {}, precision);
    const double reach = idx.thresholds().max_all();

    for (const auto& seg : segments) {
      for (const auto& v : seg.geometry.vertices()) {
        const auto it = idx.tiles().find(geohash_encode(v, precision));
        REQUIRE(it != idx.tiles().end());
        const auto& ids = it->second.segment_ids;
        REQUIRE(std::find(ids.begin(), ids.end(), seg.segment_id) != ids.end());
      }
    }

    for (int i = 0; i < 300; ++i) {
      const Coordinate p = fixtures::random_probe(rng, segments, fixtures::kOrigin, 16000.0, 400.0);
      const auto candidates = candidate_segments(idx, p);
      REQUIRE(std::is_sorted(candidates.begin(), candidates.end()));
      REQUIRE(tiles_for_query(idx, p).size() <= 9);
      for (std::uint32_t s = 0; s < idx.catalog().segments().size(); ++s) {
        if (point_to_polyline(p, idx.catalog().segment(s).geometry).distance_m <= reach) {
          REQUIRE(std::binary_search(candidates.begin(), candidates.end(), s));
        }
      }
    }
  }
}

TEST_CASE("query in an empty region returns nothing") {
  const auto route = fixtures::straight_route("I-65", fixtures::kOrigin, 2, 1, "A");
  const TiledIndex idx = build_index(route.segments, route.markers, 5);
  CHECK(tiles_for_query(idx, Coordinate(10.0, 10.0)).empty());
  CHECK(candidate_segments(idx, Coordinate(10.0, 10.0)).empty());
}

TEST_CASE("tile store file layout and round trip") {
  const Coordinate a = fixtures::kOrigin;
  const GeoBox cell = geohash_decode(geohash_encode(a, 5));
  // Two routes; the interstate crosses into the next cell east and north-east.
  const Coordinate c0 = cell.center();
  const Coordinate c1(c0.lat(), cell.lon_max + 0.01);
  const RouteRef i65 = road_name_to_type("I-65");
  const RouteRef main = road_name_to_type("Main St");
  const std::vector<RoadSegment> segs{
      fixtures::make_segment("I", "I-65", {c0, c1}, parse_post_range("0", "1", "", "")),
      fixtures::make_segment("M", "Main St", {offset_m(c0, 100, 0), offset_m(c0, 200, 50)})};
  const std::vector<MileMarker> markers{{i65, 0, c0}, {i65, 1, c1}, {main, 3, offset_m(c0, 100, 0)}};
  const TiledIndex idx = build_index(segs, markers, 5);
  REQUIRE(idx.tiles().size() == 2);

  fixtures::TempDir dir("tiles");
  const TileWriteSummary summary = write_tiles(idx, dir.path());
  CHECK(summary.tile_files == 2);
  CHECK(summary.marker_files == 2);
  CHECK(summary.meta_files == 1);
  CHECK(summary.segment_files == 1);

  std::size_t top_json = 0, marker_json = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) top_json += e.path().extension() == ".json";
  for (const auto& e : std::filesystem::directory_iterator(dir / "markers")) marker_json += e.path().extension() == ".json";
  CHECK(top_json == 2 + 1 + 1);
  CHECK(marker_json == 2);

  for (const auto& [id, tile] : idx.tiles()) {
    const auto read = read_tile(dir.path(), id);
    REQUIRE(read.has_value());
    CHECK(*read == tile);
  }
  CHECK_FALSE(read_tile(dir.path(), GeohashId("zzzzz")).has_value());

  const TiledIndex back = read_index(dir.path());
  CHECK(back.precision() == idx.precision());
  CHECK(back.thresholds() == idx.thresholds());
  CHECK(back.tiles() == idx.tiles());
  REQUIRE(back.catalog().segments().size() == 2);
  for (std::uint32_t i = 0; i < 2; ++i) {
    CHECK(back.catalog().segment(i).segment_id == idx.catalog().segment(i).segment_id);
    CHECK(back.catalog().segment(i).geometry == idx.catalog().segment(i).geometry);
    CHECK(back.catalog().segment(i).posts == idx.catalog().segment(i).posts);
  }
  CHECK(back.catalog().all_markers().size() == 2);

  fixtures::TempDir again("tiles2");
  write_tiles(back, again.path());
  CHECK(fixtures::snapshot(dir.path()) == fixtures::snapshot(again.path()));

  const auto store = TileStore::open(dir.path());
  CHECK(store->loaded_tiles() == 0);
  CHECK(store->tile_members(geohash_encode(c0, 5)) != nullptr);
  CHECK(store->tile_members(GeohashId("zzzzz")) == nullptr);
  CHECK(store->loaded_tiles() == 1);

  fixtures::write_text(dir / (geohash_encode(c0, 5).str() + ".json"), "{not json");
  try {
    read_tile(dir.path(), geohash_encode(c0, 5));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(geohash_encode(c0, 5).str() + ".json") != std::string::npos);
  }
  CHECK_THROWS_AS(read_index(dir / "missing"), FormatError);
}

TEST_CASE("mile segment synthesis") {
  const RouteRef ref = road_name_to_type("I-65");
  const Coordinate s = fixtures::kOrigin;
  const auto seg = fixtures::make_segment("A", "I-65", {s, offset_m(s, 2.5 * kMetersPerMile, 0)});

  const std::vector<MileMarker> three{{ref, 10, s},
                                      {ref, 11, offset_m(s, kMetersPerMile, 30)},
                                      {ref, 12, offset_m(s, 2 * kMetersPerMile, -30)}};
  const RoadCatalog cat({seg}, three);
  const auto miles = synthesize_mile_segments(cat, ref);
  REQUIRE(miles.size() == 2);
  CHECK(miles[0].posts.start_post == 10);
  CHECK(miles[0].posts.end_post == 11);
  CHECK(miles[1].posts.start_post == 11);
  CHECK(miles[1].posts.end_post == 12);
  CHECK_FALSE(miles[0].posts.start_offset.has_value());
  const double total = miles[0].geometry.length_m() + miles[1].geometry.length_m();
  // Markers sit beside the road; their projections are 2 miles apart.
  CHECK(std::abs(total - 2 * kMetersPerMile) <= 0.001 * 2 * kMetersPerMile);
  // Non-overlapping and ordered: each piece starts where the previous ended.
  CHECK(great_circle_distance(miles[0].geometry.vertices().back(), miles[1].geometry.vertices().front()) < 0.01);

  const RoadCatalog single({seg}, {{ref, 10, s}});
  CHECK(synthesize_mile_segments(single, ref).empty());
}

TEST_CASE("mile synthesis over a multi-segment route with markers against digitization") {
  // Segments digitized south to north; posts increase southward.
  const Coordinate s = fixtures::kOrigin;
  const RouteRef ref = road_name_to_type("US-31");
  std::vector<RoadSegment> segs;
  std::vector<MileMarker> markers;
  for (int k = 0; k < 4; ++k) {
    segs.push_back(fixtures::make_segment("U" + std::to_string(k), "US-31",
                                          {offset_m(s, k * kMetersPerMile, 0), offset_m(s, (k + 1) * kMetersPerMile, 0)}));
  }
  for (int post = 0; post <= 4; ++post) markers.push_back({ref, post, offset_m(s, (4 - post) * kMetersPerMile, 10)});
  const RoadCatalog cat(segs, markers);
  const auto miles = synthesize_mile_segments(cat, ref);
  REQUIRE(miles.size() == 4);
  double total = 0.0;
  for (std::size_t k = 0; k < miles.size(); ++k) {
    CHECK(miles[k].posts.start_post == static_cast<int>(k));
    total += miles[k].geometry.length_m();
    // Geometry runs in increasing post order: it starts at the northern end.
    CHECK(miles[k].geometry.vertices().front().lat() > miles[k].geometry.vertices().back().lat());
  }
  CHECK(std::abs(total - 4 * kMetersPerMile) <= 0.001 * 4 * kMetersPerMile);
}
