#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "plowtrack/geo.hpp"
#include "plowtrack/thresholds.hpp"

namespace plowtrack {

enum class RoadClass { Interstate, StateRoad, LocalRoad };

std::string_view to_string(RoadClass c);
std::optional<RoadClass> road_class_from_string(std::string_view s);

/// A parsed route reference. `canonical_name` is empty exactly when the raw
/// text could not be parsed (blank input).
struct RouteRef {
  std::string raw;
  RoadClass road_class = RoadClass::LocalRoad;
  std::string canonical_name;

  bool valid() const { return !canonical_name.empty(); }
  friend bool operator==(const RouteRef&, const RouteRef&) = default;
};

/// Classifies and canonicalizes a route name.
///
///   "I-65", "i 65"              -> Interstate, "I-65"
///   "US-31", "us 31"            -> StateRoad,  "US-31"
///   "SR-26", "sr 26", "S.R. 26" -> StateRoad,  "SR-26"
///   anything else non-blank     -> LocalRoad,  uppercased with whitespace runs
///                                  collapsed to one space
///   blank                       -> invalid RouteRef (no route)
RouteRef road_name_to_type(std::string_view raw);

/// Milepost extent of a segment or work order. Offsets are in miles and
/// only meaningful alongside their post.
struct PostRange {
  std::optional<int> start_post;
  std::optional<int> end_post;
  std::optional<double> start_offset;
  std::optional<double> end_offset;

  bool has_bounds() const { return start_post.has_value() && end_post.has_value(); }

  /// Throws std::invalid_argument when an offset has no post, |offset| >= 1,
  /// start_post > end_post, or the offset-adjusted start exceeds the end.
  void validate() const;

  friend bool operator==(const PostRange&, const PostRange&) = default;
};

/// Parses and validates post/offset cells; blank text means absent. Throws
/// std::invalid_argument on bad numbers or an invalid range.
PostRange parse_post_range(std::string_view start_post, std::string_view end_post, std::string_view start_offset,
                           std::string_view end_offset);

struct RoadSegment {
  std::string segment_id;
  RouteRef route;
  PostRange posts;
  Polyline geometry;
};

struct MileMarker {
  RouteRef route;
  int post = 0;
  Coordinate location;
};

struct GeohashTile {
  GeohashId id;
  std::vector<std::string> segment_ids;  // sorted

  friend bool operator==(const GeohashTile&, const GeohashTile&) = default;
};

/// Bounding box of a segment's geometry plus the cosine of its largest
/// absolute latitude, for cheap distance lower bounds.
struct SegmentEnvelope {
  GeoBox box;
  double cos_max_lat = 1.0;
};

/// A route's segments chained into one line, with every marker projected
/// onto it. Milepost interpolation works in this frame.
struct RouteFrame {
  RouteRef route;
  Polyline line;
  /// Arc position (m) of each marker's projection, parallel to the route's
  /// post-sorted marker list.
  std::vector<double> marker_arc_m;
};

/// Where a segment sits on its route frame.
struct FramePlacement {
  double begin_m = 0.0;  // frame arc at the segment's first vertex
  double end_m = 0.0;    // frame arc at the segment's last vertex
};

/// Segments, markers and route frames; shared by in-memory and on-disk
/// indexes. Immutable after construction.
class RoadCatalog {
 public:
  RoadCatalog() = default;
  /// Throws FormatError on duplicate segment ids or duplicate (route, post)
  /// markers.
  RoadCatalog(std::vector<RoadSegment> segments, std::vector<MileMarker> markers);

  /// Sorted by segment_id.
  std::span<const RoadSegment> segments() const { return segments_; }
  const RoadSegment& segment(std::uint32_t index) const { return segments_[index]; }
  const SegmentEnvelope& envelope(std::uint32_t index) const { return envelopes_[index]; }

  std::optional<std::uint32_t> index_of(std::string_view segment_id) const;
  const RoadSegment* find(std::string_view segment_id) const;

  /// Post-sorted markers of a canonical route; empty when unknown.
  std::span<const MileMarker> markers(std::string_view canonical_route) const;
  const std::map<std::string, std::vector<MileMarker>>& all_markers() const { return markers_; }

  const RouteFrame* frame(std::string_view canonical_route) const;
  /// Placement of a segment on its route's frame; nullopt for segments
  /// without a valid route.
  std::optional<FramePlacement> placement(std::uint32_t index) const;

 private:
  void build_frames();

  std::vector<RoadSegment> segments_;
  std::vector<SegmentEnvelope> envelopes_;
  std::unordered_map<std::string, std::uint32_t> by_id_;
  std::map<std::string, std::vector<MileMarker>> markers_;
  std::map<std::string, RouteFrame> frames_;
  std::vector<std::optional<FramePlacement>> placements_;
};

/// Anything that can answer "which segments are registered in this tile".
class RoadIndex {
 public:
  virtual ~RoadIndex() = default;

  virtual const RoadCatalog& catalog() const = 0;
  virtual int precision() const = 0;
  /// Thresholds the tiles were buffered for.
  virtual const MatchThresholds& thresholds() const = 0;
  /// Segment indices registered in tile `id`, sorted; nullptr when the tile
  /// does not exist.
  virtual const std::vector<std::uint32_t>* tile_members(const GeohashId& id) const = 0;
};

/// Geohash-tiled spatial index held fully in memory.
class TiledIndex final : public RoadIndex {
 public:
  TiledIndex(int precision, MatchThresholds thresholds, RoadCatalog catalog,
             std::map<GeohashId, GeohashTile> tiles);

  const RoadCatalog& catalog() const override { return catalog_; }
  int precision() const override { return precision_; }
  const MatchThresholds& thresholds() const override { return thresholds_; }
  const std::vector<std::uint32_t>* tile_members(const GeohashId& id) const override;

  const std::map<GeohashId, GeohashTile>& tiles() const { return tiles_; }

 private:
  int precision_;
  MatchThresholds thresholds_;
  RoadCatalog catalog_;
  std::map<GeohashId, GeohashTile> tiles_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> members_;
};

inline constexpr int kMinIndexPrecision = 4;
inline constexpr int kMaxIndexPrecision = 7;

/// Registers every segment in each tile it passes within `thresholds.max_all()`
/// meters of. Throws std::invalid_argument for a precision outside [4, 7] and
/// FormatError on duplicate ids.
TiledIndex build_index(std::vector<RoadSegment> segments, std::vector<MileMarker> markers, int precision,
                       const MatchThresholds& thresholds = {});

/// Tiles covering the point's geohash cell and its neighbours that exist in
/// the index, in geohash order.
std::vector<const GeohashTile*> tiles_for_query(const TiledIndex& idx, const Coordinate& p);

/// Union of segment indices over the query tiles, sorted and de-duplicated.
std::vector<std::uint32_t> candidate_segments(const RoadIndex& idx, const Coordinate& p);

/// 1-mile segments between consecutive markers of `route`, cut from the
/// route frame between marker projections. Empty with fewer than two
/// markers or no geometry on the route.
std::vector<RoadSegment> synthesize_mile_segments(const RoadCatalog& catalog, const RouteRef& route);

// Text inputs ---------------------------------------------------------------

/// "LINESTRING (lon lat, lon lat, ...)"; extra ordinates (Z/M) are ignored.
Polyline parse_wkt_linestring(std::string_view wkt);

/// Inventory table: SegmentId, RouteRef, StartPost, EndPost, StartOffset,
/// EndOffset, Geometry. Any bad row throws FormatError with source:line.
std::vector<RoadSegment> parse_inventory(std::string_view text, std::string_view source);

/// Marker table: RouteRef, Post, Lat, Lon.
std::vector<MileMarker> parse_markers(std::string_view text, std::string_view source);

// Tile store ---------------------------------------------------------------

struct TileWriteSummary {
  std::size_t tile_files = 0;
  std::size_t marker_files = 0;
  std::size_t meta_files = 0;
  std::size_t segment_files = 0;

  std::size_t total() const { return tile_files + marker_files + meta_files + segment_files; }
};

/// Layout under `directory`:
///   index-meta.json          precision, thresholds, route list
///   segments.json            every segment with full geometry
///   <geohash>.json           segment ids registered in the tile
///   markers/<route>.json     one file per route
/// Existing *.json files in the directory are replaced; files are written
/// atomically.
TileWriteSummary write_tiles(const TiledIndex& idx, const std::filesystem::path& directory);

/// One tile file; nullopt when it does not exist. Throws FormatError naming
/// the file when it is malformed.
std::optional<GeohashTile> read_tile(const std::filesystem::path& directory, const GeohashId& id);

/// Loads the whole store into memory.
TiledIndex read_index(const std::filesystem::path& directory);

/// Tile store opened from disk; tile files are read on first use and
/// cached. Thread-safe.
class TileStore final : public RoadIndex {
 public:
  static std::unique_ptr<TileStore> open(const std::filesystem::path& directory);
  ~TileStore() override;

  const RoadCatalog& catalog() const override;
  int precision() const override;
  const MatchThresholds& thresholds() const override;
  const std::vector<std::uint32_t>* tile_members(const GeohashId& id) const override;

  /// Tiles read from disk so far.
  std::size_t loaded_tiles() const;

 private:
  struct Impl;
  explicit TileStore(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace plowtrack
