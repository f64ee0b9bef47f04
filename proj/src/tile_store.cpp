#include <json.hpp>

#include <mutex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "plowtrack/inventory.hpp"
#include "plowtrack/io.hpp"

namespace plowtrack {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormatName = "plowtrack-tiles";
constexpr int kFormatVersion = 1;

std::string dump(const Json& j) { return j.dump() + "\n"; }

Json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": malformed JSON: " + e.what());
  }
}

Json optional_json(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json segment_to_json(const RoadSegment& s) {
  Json geom = Json::array();
  for (const auto& c : s.geometry.vertices()) geom.push_back(Json::array({c.lon(), c.lat()}));
  return Json{{"id", s.segment_id},
              {"route", s.route.raw},
              {"start_post", optional_json(s.posts.start_post)},
              {"end_post", optional_json(s.posts.end_post)},
              {"start_offset", optional_json(s.posts.start_offset)},
              {"end_offset", optional_json(s.posts.end_offset)},
              {"geometry", std::move(geom)}};
}

template <typename T>
std::optional<T> optional_field(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

RoadSegment segment_from_json(const Json& j) {
  RoadSegment s;
  s.segment_id = j.at("id").get<std::string>();
  s.route = road_name_to_type(j.at("route").get<std::string>());
  s.posts.start_post = optional_field<int>(j, "start_post");
  s.posts.end_post = optional_field<int>(j, "end_post");
  s.posts.start_offset = optional_field<double>(j, "start_offset");
  s.posts.end_offset = optional_field<double>(j, "end_offset");
  s.posts.validate();
  std::vector<Coordinate> verts;
  for (const auto& v : j.at("geometry")) verts.emplace_back(v.at(1).get<double>(), v.at(0).get<double>());
  s.geometry = Polyline(std::move(verts));
  return s;
}

std::string marker_file_name(std::string_view canonical) { return "markers/" + file_safe(canonical) + ".json"; }

struct Meta {
  int precision = 0;
  MatchThresholds thresholds;
  std::vector<std::string> marker_files;
};

Meta read_meta(const fs::path& dir) {
  const fs::path path = dir / "index-meta.json";
  if (!fs::exists(path)) throw FormatError(dir.string() + ": not a tile store (index-meta.json missing)");
  const Json j = parse_json_file(path);
  try {
    if (j.at("format").get<std::string>() != kFormatName || j.at("version").get<int>() != kFormatVersion) {
      throw FormatError(path.string() + ": unsupported tile store format");
    }
    Meta m;
    m.precision = j.at("precision").get<int>();
    const Json& th = j.at("thresholds");
    m.thresholds.interstate_m = th.at("interstate_m").get<double>();
    m.thresholds.state_m = th.at("state_m").get<double>();
    m.thresholds.local_m = th.at("local_m").get<double>();
    m.thresholds.hint_m = th.at("hint_m").get<double>();
    m.thresholds.validate();
    for (const auto& r : j.at("routes")) m.marker_files.push_back(r.at("file").get<std::string>());
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<RoadSegment> read_segments(const fs::path& dir) {
  const fs::path path = dir / "segments.json";
  const Json j = parse_json_file(path);
  std::vector<RoadSegment> out;
  try {
    for (const auto& s : j.at("segments")) out.push_back(segment_from_json(s));
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

std::vector<MileMarker> read_markers(const fs::path& dir, const std::vector<std::string>& files) {
  std::vector<MileMarker> out;
  for (const auto& f : files) {
    const fs::path path = dir / f;
    const Json j = parse_json_file(path);
    try {
      const RouteRef route = road_name_to_type(j.at("route").get<std::string>());
      for (const auto& m : j.at("markers")) {
        out.push_back(MileMarker{route, m.at("post").get<int>(),
                                 Coordinate(m.at("lat").get<double>(), m.at("lon").get<double>())});
      }
    } catch (const Json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

TileWriteSummary write_tiles(const TiledIndex& idx, const fs::path& directory) {
  fs::create_directories(directory / "markers");
  // Stale tiles from an earlier build would otherwise survive.
  for (const auto& sub : {directory, directory / "markers"}) {
    for (const auto& entry : fs::directory_iterator(sub)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") fs::remove(entry.path());
    }
  }

  TileWriteSummary summary;
  const RoadCatalog& cat = idx.catalog();

  Json segments = Json::array();
  for (const auto& s : cat.segments()) segments.push_back(segment_to_json(s));
  write_file_atomic(directory / "segments.json", dump(Json{{"segments", std::move(segments)}}));
  summary.segment_files = 1;

  for (const auto& [id, tile] : idx.tiles()) {
    write_file_atomic(directory / (id.str() + ".json"), dump(Json{{"id", id.str()}, {"segments", tile.segment_ids}}));
    ++summary.tile_files;
  }

  Json routes = Json::array();
  std::set<std::string> used_names;
  for (const auto& [route, markers] : cat.all_markers()) {
    const std::string file = marker_file_name(route);
    if (!used_names.insert(file).second) {
      throw FormatError("routes collide on marker file name '" + file + "'");
    }
    Json list = Json::array();
    for (const auto& m : markers) {
      list.push_back(Json{{"post", m.post}, {"lat", m.location.lat()}, {"lon", m.location.lon()}});
    }
    write_file_atomic(directory / file, dump(Json{{"route", route}, {"markers", std::move(list)}}));
    routes.push_back(Json{{"route", route}, {"file", file}, {"markers", markers.size()}});
    ++summary.marker_files;
  }

  const MatchThresholds& th = idx.thresholds();
  const Json meta{{"format", kFormatName},
                  {"version", kFormatVersion},
                  {"precision", idx.precision()},
                  {"thresholds",
                   Json{{"interstate_m", th.interstate_m},
                        {"state_m", th.state_m},
                        {"local_m", th.local_m},
                        {"hint_m", th.hint_m}}},
                  {"buffer_m", th.max_all()},
                  {"tile_count", idx.tiles().size()},
                  {"segment_count", cat.segments().size()},
                  {"routes", std::move(routes)}};
  write_file_atomic(directory / "index-meta.json", meta.dump(2) + "\n");
  summary.meta_files = 1;
  return summary;
}

std::optional<GeohashTile> read_tile(const fs::path& directory, const GeohashId& id) {
  const fs::path path = directory / (id.str() + ".json");
  if (!fs::exists(path)) return std::nullopt;
  const Json j = parse_json_file(path);
  try {
    GeohashTile tile{GeohashId(j.at("id").get<std::string>()), j.at("segments").get<std::vector<std::string>>()};
    if (tile.id != id) throw FormatError(path.string() + ": tile id does not match file name");
    return tile;
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

TiledIndex read_index(const fs::path& directory) {
  const Meta meta = read_meta(directory);
  RoadCatalog catalog(read_segments(directory), read_markers(directory, meta.marker_files));
  std::map<GeohashId, GeohashTile> tiles;
  for (const auto& entry : fs::directory_iterator(directory)) {
    const auto& path = entry.path();
    if (!entry.is_regular_file() || path.extension() != ".json") continue;
    const std::string stem = path.stem().string();
    if (stem == "index-meta" || stem == "segments") continue;
    GeohashId id;
    try {
      id = GeohashId(stem);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (auto tile = read_tile(directory, id)) tiles.emplace(id, std::move(*tile));
  }
  return TiledIndex(meta.precision, meta.thresholds, std::move(catalog), std::move(tiles));
}

// TileStore ------------------------------------------------------------------

struct TileStore::Impl {
  fs::path directory;
  int precision = 0;
  MatchThresholds thresholds;
  RoadCatalog catalog;

  mutable std::mutex mutex;
  mutable std::unordered_map<std::string, std::vector<std::uint32_t>> loaded;
  mutable std::unordered_set<std::string> missing;
};

TileStore::TileStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
TileStore::~TileStore() = default;

std::unique_ptr<TileStore> TileStore::open(const fs::path& directory) {
  auto impl = std::make_unique<Impl>();
  const Meta meta = read_meta(directory);
  impl->directory = directory;
  impl->precision = meta.precision;
  impl->thresholds = meta.thresholds;
  impl->catalog = RoadCatalog(read_segments(directory), read_markers(directory, meta.marker_files));
  return std::unique_ptr<TileStore>(new TileStore(std::move(impl)));
}

const RoadCatalog& TileStore::catalog() const { return impl_->catalog; }
int TileStore::precision() const { return impl_->precision; }
const MatchThresholds& TileStore::thresholds() const { return impl_->thresholds; }

const std::vector<std::uint32_t>* TileStore::tile_members(const GeohashId& id) const {
  std::lock_guard lock(impl_->mutex);
  if (const auto it = impl_->loaded.find(id.str()); it != impl_->loaded.end()) return &it->second;
  if (impl_->missing.contains(id.str())) return nullptr;
  const auto tile = read_tile(impl_->directory, id);
  if (!tile) {
    impl_->missing.insert(id.str());
    return nullptr;
  }
  std::vector<std::uint32_t> members;
  members.reserve(tile->segment_ids.size());
  for (const auto& sid : tile->segment_ids) {
    const auto idx = impl_->catalog.index_of(sid);
    if (!idx) throw FormatError(id.str() + ".json: unknown segment '" + sid + "'");
    members.push_back(*idx);
  }
  std::sort(members.begin(), members.end());
  // unordered_map nodes are stable, so the returned pointer stays valid.
  return &impl_->loaded.emplace(id.str(), std::move(members)).first->second;
}

std::size_t TileStore::loaded_tiles() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->loaded.size();
}

}  // namespace plowtrack
