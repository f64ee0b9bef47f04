#include "plowtrack/inventory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "plowtrack/csv.hpp"
#include "plowtrack/io.hpp"

namespace plowtrack {

void MatchThresholds::validate() const {
  for (double v : {interstate_m, state_m, local_m, hint_m}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("match thresholds must be positive");
  }
  if (hint_m < max_class()) {
    throw std::invalid_argument("hint threshold must be at least the largest class threshold");
  }
}

std::string_view to_string(RoadClass c) {
  switch (c) {
    case RoadClass::Interstate:
      return "Interstate";
    case RoadClass::StateRoad:
      return "StateRoad";
    case RoadClass::LocalRoad:
      return "LocalRoad";
  }
  return "LocalRoad";
}

std::optional<RoadClass> road_class_from_string(std::string_view s) {
  if (s == "Interstate") return RoadClass::Interstate;
  if (s == "StateRoad") return RoadClass::StateRoad;
  if (s == "LocalRoad") return RoadClass::LocalRoad;
  return std::nullopt;
}

namespace {

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

struct PrefixRule {
  std::string_view prefix;
  RoadClass road_class;
  std::string_view canonical;
};

constexpr PrefixRule kPrefixRules[] = {
    {"I-", RoadClass::Interstate, "I"},   {"I ", RoadClass::Interstate, "I"},
    {"US-", RoadClass::StateRoad, "US"},  {"US ", RoadClass::StateRoad, "US"},
    {"SR-", RoadClass::StateRoad, "SR"},  {"SR ", RoadClass::StateRoad, "SR"},
    {"S.R.", RoadClass::StateRoad, "SR"},
    // Glued forms such as "I65"; only taken when a digit follows directly.
    {"I", RoadClass::Interstate, "I"},    {"US", RoadClass::StateRoad, "US"},
    {"SR", RoadClass::StateRoad, "SR"},
};

bool needs_digit(std::string_view prefix) {
  const char last = prefix.back();
  return last != '-' && last != ' ' && last != '.';
}

}  // namespace

RouteRef road_name_to_type(std::string_view raw) {
  RouteRef ref;
  ref.raw = std::string(raw);
  const std::string upper = to_upper(trim(raw));
  if (upper.empty()) return ref;
  for (const auto& rule : kPrefixRules) {
    if (!upper.starts_with(rule.prefix)) continue;
    std::string_view rest = std::string_view(upper).substr(rule.prefix.size());
    if (needs_digit(rule.prefix) && (rest.empty() || !std::isdigit(static_cast<unsigned char>(rest.front())))) {
      continue;
    }
    while (!rest.empty() && (rest.front() == '-' || rest.front() == ' ' || rest.front() == '\t')) {
      rest.remove_prefix(1);
    }
    const std::string number = collapse_spaces(trim(rest));
    if (number.empty()) continue;
    ref.road_class = rule.road_class;
    ref.canonical_name = std::string(rule.canonical) + "-" + number;
    return ref;
  }
  ref.road_class = RoadClass::LocalRoad;
  ref.canonical_name = collapse_spaces(upper);
  return ref;
}

void PostRange::validate() const {
  if (start_offset && !start_post) throw std::invalid_argument("start offset without start post");
  if (end_offset && !end_post) throw std::invalid_argument("end offset without end post");
  for (const auto& off : {start_offset, end_offset}) {
    if (off && !(std::abs(*off) < 1.0)) throw std::invalid_argument("offset magnitude must be below 1 mile");
  }
  if (start_post && *start_post < 0) throw std::invalid_argument("negative start post");
  if (end_post && *end_post < 0) throw std::invalid_argument("negative end post");
  if (has_bounds()) {
    if (*start_post > *end_post) throw std::invalid_argument("start post after end post");
    if (*start_post + start_offset.value_or(0.0) > *end_post + end_offset.value_or(0.0)) {
      throw std::invalid_argument("offset-adjusted start after end");
    }
  }
}

// RoadCatalog ----------------------------------------------------------------

RoadCatalog::RoadCatalog(std::vector<RoadSegment> segments, std::vector<MileMarker> markers)
    : segments_(std::move(segments)) {
  std::sort(segments_.begin(), segments_.end(),
            [](const RoadSegment& a, const RoadSegment& b) { return a.segment_id < b.segment_id; });
  by_id_.reserve(segments_.size());
  envelopes_.reserve(segments_.size());
  for (std::uint32_t i = 0; i < segments_.size(); ++i) {
    const auto& seg = segments_[i];
    if (seg.segment_id.empty()) throw FormatError("segment with empty id");
    if (!by_id_.emplace(seg.segment_id, i).second) {
      throw FormatError("duplicate segment id '" + seg.segment_id + "'");
    }
    SegmentEnvelope env;
    env.box = seg.geometry.bounds();
    const double max_abs_lat = std::max(std::abs(env.box.lat_min), std::abs(env.box.lat_max));
    env.cos_max_lat = std::cos(max_abs_lat * std::numbers::pi / 180.0);
    envelopes_.push_back(env);
  }

  for (auto& m : markers) {
    if (!m.route.valid()) throw FormatError("mile marker without route");
    markers_[m.route.canonical_name].push_back(std::move(m));
  }
  for (auto& [route, list] : markers_) {
    std::sort(list.begin(), list.end(), [](const MileMarker& a, const MileMarker& b) { return a.post < b.post; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].post == list[i - 1].post) {
        throw FormatError("duplicate mile marker " + route + " post " + std::to_string(list[i].post));
      }
    }
  }
  build_frames();
}

void RoadCatalog::build_frames() {
  placements_.assign(segments_.size(), std::nullopt);
  std::map<std::string, std::vector<std::uint32_t>> by_route;
  for (std::uint32_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].route.valid()) by_route[segments_[i].route.canonical_name].push_back(i);
  }

  for (auto& [route, members] : by_route) {
    const auto start_key = [&](std::uint32_t i) {
      const auto& p = segments_[i].posts;
      return p.start_post ? *p.start_post + p.start_offset.value_or(0.0) : std::numeric_limits<double>::infinity();
    };
    std::stable_sort(members.begin(), members.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return start_key(a) < start_key(b); });

    // Chain: each segment is oriented so its first vertex is nearest the end
    // of the line built so far.
    std::vector<Coordinate> verts;
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // first/last vertex index in verts
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto geom = segments_[members[k]].geometry.vertices();
      bool reverse = false;
      if (k == 0 && members.size() > 1) {
        const auto next = segments_[members[1]].geometry.vertices();
        const auto near = [&](const Coordinate& c) {
          return std::min(great_circle_distance(c, next.front()), great_circle_distance(c, next.back()));
        };
        reverse = near(geom.front()) < near(geom.back());
      } else if (k > 0) {
        reverse = great_circle_distance(verts.back(), geom.back()) <
                  great_circle_distance(verts.back(), geom.front());
      }
      std::vector<Coordinate> oriented(geom.begin(), geom.end());
      if (reverse) std::reverse(oriented.begin(), oriented.end());
      std::size_t first = verts.size();
      auto it = oriented.begin();
      if (!verts.empty() && verts.back() == oriented.front()) {
        first = verts.size() - 1;
        ++it;
      }
      verts.insert(verts.end(), it, oriented.end());
      spans.emplace_back(first, verts.size() - 1);
      // Reversed segments run backwards along the frame.
      if (reverse) std::swap(spans.back().first, spans.back().second);
    }

    RouteFrame frame;
    frame.route = segments_[members.front()].route;
    frame.line = Polyline(std::move(verts));
    for (std::size_t k = 0; k < members.size(); ++k) {
      placements_[members[k]] =
          FramePlacement{frame.line.arc_to(spans[k].first), frame.line.arc_to(spans[k].second)};
    }
    for (const auto& m : markers(route)) {
      frame.marker_arc_m.push_back(point_to_polyline(m.location, frame.line).arc_fraction * frame.line.length_m());
    }
    frames_.emplace(route, std::move(frame));
  }
}

std::optional<std::uint32_t> RoadCatalog::index_of(std::string_view segment_id) const {
  const auto it = by_id_.find(std::string(segment_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const RoadSegment* RoadCatalog::find(std::string_view segment_id) const {
  const auto idx = index_of(segment_id);
  return idx ? &segments_[*idx] : nullptr;
}

std::span<const MileMarker> RoadCatalog::markers(std::string_view canonical_route) const {
  const auto it = markers_.find(std::string(canonical_route));
  if (it == markers_.end()) return {};
  return it->second;
}

const RouteFrame* RoadCatalog::frame(std::string_view canonical_route) const {
  const auto it = frames_.find(std::string(canonical_route));
  return it == frames_.end() ? nullptr : &it->second;
}

std::optional<FramePlacement> RoadCatalog::placement(std::uint32_t index) const { return placements_[index]; }

// TiledIndex -----------------------------------------------------------------

TiledIndex::TiledIndex(int precision, MatchThresholds thresholds, RoadCatalog catalog,
                       std::map<GeohashId, GeohashTile> tiles)
    : precision_(precision), thresholds_(thresholds), catalog_(std::move(catalog)), tiles_(std::move(tiles)) {
  for (const auto& [id, tile] : tiles_) {
    auto& members = members_[id.str()];
    members.reserve(tile.segment_ids.size());
    for (const auto& sid : tile.segment_ids) {
      const auto idx = catalog_.index_of(sid);
      if (!idx) throw FormatError("tile " + id.str() + " references unknown segment '" + sid + "'");
      members.push_back(*idx);
    }
    std::sort(members.begin(), members.end());
  }
}

const std::vector<std::uint32_t>* TiledIndex::tile_members(const GeohashId& id) const {
  const auto it = members_.find(id.str());
  return it == members_.end() ? nullptr : &it->second;
}

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;
// Slack on degree conversions of the buffer so registration never misses.
constexpr double kBufferSlack = 1.05;

double lon_buffer_deg(double buffer_m, double lat_lo, double lat_hi) {
  const double max_abs = std::min(89.0, std::max(std::abs(lat_lo), std::abs(lat_hi)));
  return buffer_m * kBufferSlack / (kMetersPerDegree * std::cos(max_abs * std::numbers::pi / 180.0));
}

// Liang-Barsky: does the segment a->b (lon/lat degrees, b may be unwrapped)
// touch the box?
bool segment_hits_box(double ax, double ay, double bx, double by, double x0, double x1, double y0, double y1) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = bx - ax, dy = by - ay;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {ax - x0, x1 - ax, ay - y0, y1 - ay};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

void register_segment(const Polyline& line, std::uint32_t index, int precision, double buffer_m,
                      std::map<GeohashId, std::set<std::uint32_t>>& cells) {
  const CellSize cell = geohash_cell_size(precision);
  const auto rows = static_cast<long long>(std::llround(180.0 / cell.lat_deg));
  const auto cols = static_cast<long long>(std::llround(360.0 / cell.lon_deg));
  const double lat_buf = buffer_m * kBufferSlack / kMetersPerDegree;

  const auto verts = line.vertices();
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    const Coordinate& a = verts[i];
    const double bx = a.lon() + lon_delta(a.lon(), verts[i + 1].lon());
    const double by = verts[i + 1].lat();
    const double lat_lo = std::max(-90.0, std::min(a.lat(), by) - lat_buf);
    const double lat_hi = std::min(90.0, std::max(a.lat(), by) + lat_buf);
    const double lon_buf = lon_buffer_deg(buffer_m, lat_lo, lat_hi);
    const double lon_lo = std::min(a.lon(), bx) - lon_buf;
    const double lon_hi = std::max(a.lon(), bx) + lon_buf;

    const auto r0 = std::max(0LL, static_cast<long long>(std::floor((lat_lo + 90.0) / cell.lat_deg)));
    const auto r1 = std::min(rows - 1, static_cast<long long>(std::floor((lat_hi + 90.0) / cell.lat_deg)));
    const auto c0 = static_cast<long long>(std::floor((lon_lo + 180.0) / cell.lon_deg));
    const auto c1 = static_cast<long long>(std::floor((lon_hi + 180.0) / cell.lon_deg));
    for (auto r = r0; r <= r1; ++r) {
      const double cy0 = -90.0 + static_cast<double>(r) * cell.lat_deg;
      const double cy1 = cy0 + cell.lat_deg;
      const double cell_lon_buf = lon_buffer_deg(buffer_m, cy0 - lat_buf, cy1 + lat_buf);
      for (auto c = c0; c <= c1; ++c) {
        const double cx0 = -180.0 + static_cast<double>(c) * cell.lon_deg;
        const double cx1 = cx0 + cell.lon_deg;
        if (!segment_hits_box(a.lon(), a.lat(), bx, by, cx0 - cell_lon_buf, cx1 + cell_lon_buf, cy0 - lat_buf,
                              cy1 + lat_buf)) {
          continue;
        }
        const long long wrapped = ((c % cols) + cols) % cols;
        const Coordinate center(cy0 + cell.lat_deg / 2.0,
                                -180.0 + (static_cast<double>(wrapped) + 0.5) * cell.lon_deg);
        cells[geohash_encode(center, precision)].insert(index);
      }
    }
  }
}

}  // namespace

TiledIndex build_index(std::vector<RoadSegment> segments, std::vector<MileMarker> markers, int precision,
                       const MatchThresholds& thresholds) {
  if (precision < kMinIndexPrecision || precision > kMaxIndexPrecision) {
    throw std::invalid_argument("index precision must be in [4, 7], got " + std::to_string(precision));
  }
  thresholds.validate();
  RoadCatalog catalog(std::move(segments), std::move(markers));

  std::map<GeohashId, std::set<std::uint32_t>> cells;
  const double buffer = thresholds.max_all();
  for (std::uint32_t i = 0; i < catalog.segments().size(); ++i) {
    register_segment(catalog.segment(i).geometry, i, precision, buffer, cells);
  }

  std::map<GeohashId, GeohashTile> tiles;
  for (const auto& [id, members] : cells) {
    GeohashTile tile{id, {}};
    tile.segment_ids.reserve(members.size());
    for (auto m : members) tile.segment_ids.push_back(catalog.segment(m).segment_id);
    tiles.emplace(id, std::move(tile));
  }
  return TiledIndex(precision, thresholds, std::move(catalog), std::move(tiles));
}

std::vector<const GeohashTile*> tiles_for_query(const TiledIndex& idx, const Coordinate& p) {
  std::vector<const GeohashTile*> out;
  for (const auto& id : geohash_neighbors(geohash_encode(p, idx.precision()))) {
    const auto it = idx.tiles().find(id);
    if (it != idx.tiles().end()) out.push_back(&it->second);
  }
  return out;
}

std::vector<std::uint32_t> candidate_segments(const RoadIndex& idx, const Coordinate& p) {
  std::vector<std::uint32_t> out;
  for (const auto& id : geohash_neighbors(geohash_encode(p, idx.precision()))) {
    if (const auto* members = idx.tile_members(id)) out.insert(out.end(), members->begin(), members->end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<RoadSegment> synthesize_mile_segments(const RoadCatalog& catalog, const RouteRef& route) {
  std::vector<RoadSegment> out;
  const auto markers = catalog.markers(route.canonical_name);
  const RouteFrame* frame = catalog.frame(route.canonical_name);
  if (markers.size() < 2 || frame == nullptr) return out;

  const double total = frame->line.length_m();
  for (std::size_t k = 0; k + 1 < markers.size(); ++k) {
    const double s0 = frame->marker_arc_m[k];
    const double s1 = frame->marker_arc_m[k + 1];
    if (s0 == s1) continue;
    RoadSegment seg;
    seg.segment_id = route.canonical_name + "#" + std::to_string(markers[k].post) + "-" +
                     std::to_string(markers[k + 1].post);
    seg.route = frame->route;
    seg.posts.start_post = markers[k].post;
    seg.posts.end_post = markers[k + 1].post;
    seg.geometry = s0 < s1 ? frame->line.slice(s0 / total, s1 / total)
                           : frame->line.slice(s1 / total, s0 / total).reversed();
    out.push_back(std::move(seg));
  }
  return out;
}

// Text inputs ----------------------------------------------------------------

Polyline parse_wkt_linestring(std::string_view wkt) {
  wkt = trim(wkt);
  const std::string upper = to_upper(wkt.substr(0, std::min<std::size_t>(wkt.size(), 10)));
  if (!upper.starts_with("LINESTRING")) throw std::invalid_argument("geometry is not a LINESTRING");
  const auto open = wkt.find('(');
  const auto close = wkt.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw std::invalid_argument("malformed LINESTRING");
  }
  std::vector<Coordinate> verts;
  std::string_view body = wkt.substr(open + 1, close - open - 1);
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view pair = trim(body.substr(0, comma));
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    const auto sp = pair.find_first_of(" \t");
    if (sp == std::string_view::npos) throw std::invalid_argument("LINESTRING vertex needs lon and lat");
    const auto lon = parse_double(pair.substr(0, sp));
    std::string_view rest = trim(pair.substr(sp));
    const auto sp2 = rest.find_first_of(" \t");
    const auto lat = parse_double(rest.substr(0, sp2));
    if (!lon || !lat) throw std::invalid_argument("bad LINESTRING vertex '" + std::string(pair) + "'");
    const Coordinate c(*lat, *lon);
    // Repeated vertices carry no geometry.
    if (verts.empty() || verts.back() != c) verts.push_back(c);
  }
  return Polyline(std::move(verts));
}

namespace {

std::optional<int> optional_post(std::string_view text, const char* what) {
  if (trim(text).empty()) return std::nullopt;
  const auto v = parse_integer(text);
  if (!v || *v < 0 || *v > 100000) throw std::invalid_argument(std::string("bad ") + what + " '" + std::string(text) + "'");
  return static_cast<int>(*v);
}

std::optional<double> optional_offset(std::string_view text, const char* what) {
  if (trim(text).empty()) return std::nullopt;
  const auto v = parse_double(text);
  if (!v) throw std::invalid_argument(std::string("bad ") + what + " '" + std::string(text) + "'");
  return *v;
}

}  // namespace

PostRange parse_post_range(std::string_view start_post, std::string_view end_post, std::string_view start_offset,
                           std::string_view end_offset) {
  PostRange r;
  r.start_post = optional_post(start_post, "StartPost");
  r.end_post = optional_post(end_post, "EndPost");
  r.start_offset = optional_offset(start_offset, "StartOffset");
  r.end_offset = optional_offset(end_offset, "EndOffset");
  r.validate();
  return r;
}

std::vector<RoadSegment> parse_inventory(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  std::vector<RoadSegment> out;
  if (table.header.empty()) return out;
  const ColumnMap cols(table.header, std::string(source));
  const auto c_id = cols.require("SegmentId");
  const auto c_route = cols.require("RouteRef");
  const auto c_sp = cols.require("StartPost");
  const auto c_ep = cols.require("EndPost");
  const auto c_so = cols.require("StartOffset");
  const auto c_eo = cols.require("EndOffset");
  const auto c_geom = cols.require("Geometry");
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    const auto where = std::string(source) + ":" + std::to_string(row.line) + ": ";
    try {
      RoadSegment seg;
      seg.segment_id = std::string(trim(cell(row, c_id)));
      if (seg.segment_id.empty()) throw std::invalid_argument("empty SegmentId");
      if (!seen.insert(seg.segment_id).second) throw std::invalid_argument("duplicate SegmentId '" + seg.segment_id + "'");
      seg.route = road_name_to_type(cell(row, c_route));
      seg.posts = parse_post_range(cell(row, c_sp), cell(row, c_ep), cell(row, c_so), cell(row, c_eo));
      seg.geometry = parse_wkt_linestring(cell(row, c_geom));
      out.push_back(std::move(seg));
    } catch (const std::invalid_argument& e) {
      throw FormatError(where + e.what());
    }
  }
  return out;
}

std::vector<MileMarker> parse_markers(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  std::vector<MileMarker> out;
  if (table.header.empty()) return out;
  const ColumnMap cols(table.header, std::string(source));
  const auto c_route = cols.require("RouteRef");
  const auto c_post = cols.require("Post");
  const auto c_lat = cols.require("Lat");
  const auto c_lon = cols.require("Lon");
  std::set<std::pair<std::string, int>> seen;
  for (const auto& row : table.rows) {
    const auto where = std::string(source) + ":" + std::to_string(row.line) + ": ";
    try {
      MileMarker m;
      m.route = road_name_to_type(cell(row, c_route));
      if (!m.route.valid()) throw std::invalid_argument("empty RouteRef");
      const auto post = parse_integer(cell(row, c_post));
      if (!post || *post < 0) throw std::invalid_argument("bad Post '" + std::string(cell(row, c_post)) + "'");
      m.post = static_cast<int>(*post);
      const auto lat = parse_double(cell(row, c_lat));
      const auto lon = parse_double(cell(row, c_lon));
      if (!lat || !lon) throw std::invalid_argument("bad Lat/Lon");
      m.location = Coordinate(*lat, *lon);
      if (!seen.emplace(m.route.canonical_name, m.post).second) {
        throw std::invalid_argument("duplicate marker " + m.route.canonical_name + " post " + std::to_string(m.post));
      }
      out.push_back(std::move(m));
    } catch (const std::invalid_argument& e) {
      throw FormatError(where + e.what());
    }
  }
  return out;
}

}  // namespace plowtrack
