#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "plowtrack/config.hpp"
#include "plowtrack/inventory.hpp"
#include "plowtrack/io.hpp"
#include "plowtrack/match.hpp"
#include "plowtrack/tracks.hpp"
#include "plowtrack/workorder.hpp"

namespace plowtrack::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> timezone;
  std::optional<int> precision;
  std::optional<double> cap_seconds;
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;
  std::string out;

  void attach(CLI::App& cmd, bool out_required) {
    cmd.add_option("--config", config_path, "key=value settings file");
    cmd.add_option("--tz", timezone, "IANA time zone for local days");
    cmd.add_option("--precision", precision, "geohash precision of the index");
    cmd.add_option("--cap-seconds", cap_seconds, "largest gap credited between samples");
    cmd.add_option("--abs-tol", abs_tol, "absolute match tolerance, hours");
    cmd.add_option("--rel-tol", rel_tol, "relative match tolerance");
    auto* o = cmd.add_option("--out", out, "output path");
    if (out_required) o->required();
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path.empty()) config = parse_config(read_file(config_path), config_path);
    if (timezone) config.timezone = *timezone;
    if (precision) config.precision = *precision;
    if (cap_seconds) config.cap_seconds = *cap_seconds;
    if (abs_tol) config.abs_tol_hours = *abs_tol;
    if (rel_tol) config.rel_tol = *rel_tol;
    config.validate();
    return config;
  }
};

std::string fraction(std::size_t part, std::size_t whole) {
  return format_fixed(whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole), 4);
}

std::unique_ptr<TileStore> open_index(const std::string& dir, const RunConfig& config) {
  auto store = TileStore::open(dir);
  if (config.thresholds.max_class() > store->thresholds().max_all()) {
    throw FormatError(dir + ": index was built for thresholds up to " + format_double(store->thresholds().max_all()) +
                      " m; rebuild it for the configured thresholds");
  }
  return store;
}

void write_rejects_sidecar(const fs::path& path, const std::vector<RejectedRow>& rejects) {
  if (rejects.empty()) {
    fs::remove(path);
    return;
  }
  write_file_atomic(path, format_rejects(rejects));
}

fs::path json_sibling(const fs::path& report) {
  fs::path p = report;
  p.replace_extension(".json");
  if (p == report) p += ".json";
  return p;
}

fs::path rejects_sibling(const fs::path& report) {
  fs::path p = report;
  p.replace_extension();
  p += ".rejects.csv";
  return p;
}

// build-index -------------------------------------------------------------------

int build_index_cmd(const std::string& inventory_path, const std::string& markers_path, const CommonFlags& flags,
                    std::ostream& out) {
  const RunConfig config = flags.resolve();
  auto segments = parse_inventory(read_file(inventory_path), inventory_path);
  auto markers = parse_markers(read_file(markers_path), markers_path);
  const std::size_t segment_count = segments.size();
  const std::size_t marker_count = markers.size();
  const TiledIndex idx = build_index(std::move(segments), std::move(markers), config.precision, config.thresholds);
  write_tiles(idx, flags.out);
  out << segment_count << " segments, " << idx.tiles().size() << " tiles, " << marker_count << " markers\n";
  return kExitOk;
}

// match ---------------------------------------------------------------------------

std::vector<MatchedTrack> match_all(const RoadIndex& idx, const DayTracks& tracks, const MatchThresholds& th) {
  std::vector<const DayTrack*> work;
  work.reserve(tracks.size());
  for (const auto& [key, track] : tracks) work.push_back(&track);

  std::vector<MatchedTrack> results(work.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      results[i] = MatchedTrack{work[i]->day, work[i]->vehicle_id, match_track(idx, *work[i], th)};
    }
  };
  const unsigned n = std::clamp<unsigned>(std::thread::hardware_concurrency(), 1, 16);
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n && t < work.size(); ++t) pool.emplace_back(worker);
  worker();
  return results;
}

int match_cmd(const std::string& gps_path, const std::string& index_dir, const CommonFlags& flags, std::ostream& out) {
  const RunConfig config = flags.resolve();
  const LocalZone zone = LocalZone::load(config.timezone);
  const auto store = open_index(index_dir, config);
  const IngestResult ingest = ingest_gps(read_file(gps_path), gps_path, zone);

  const fs::path out_dir = flags.out;
  fs::create_directories(out_dir);
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") fs::remove(entry.path());
  }

  const auto matched = match_all(*store, ingest.tracks, config.thresholds);
  std::size_t points = 0;
  std::size_t off_road = 0;
  for (const auto& track : matched) {
    points += track.points.size();
    off_road += static_cast<std::size_t>(std::count_if(track.points.begin(), track.points.end(),
                                                       [](const MatchedPoint& p) { return p.off_road(); }));
    write_file_atomic(out_dir / matched_track_file_name(track), matched_track_to_json(track, zone));
  }
  write_rejects_sidecar(out_dir / "rejects.csv", ingest.rejects);

  out << ingest.rows << " rows, " << points << " points in " << matched.size() << " tracks, " << ingest.rejects.size()
      << " rejected, " << ingest.duplicates << " duplicates; off-road " << off_road << " ("
      << fraction(off_road, points) << ")\n";
  return kExitOk;
}

// verify / create ----------------------------------------------------------------

int verify_cmd(const std::string& orders_path, const std::string& matched_dir, const std::string& index_dir,
               const CommonFlags& flags, std::ostream& out) {
  const RunConfig config = flags.resolve();
  const auto store = open_index(index_dir, config);
  const auto orders = parse_work_orders(read_file(orders_path), orders_path);
  const MatchedTracks tracks = read_matched_tracks(matched_dir);
  const auto records = verify(orders.rows, tracks, store->catalog(), config.verify_options());

  const ReportMeta meta = config.to_meta();
  const fs::path report = flags.out;
  write_file_atomic(report, verification_report_csv(records, meta));
  write_file_atomic(json_sibling(report), verification_report_json(records, meta));
  write_rejects_sidecar(rejects_sibling(report), orders.rejects);

  std::size_t counts[3] = {0, 0, 0};
  std::size_t multi_day = 0;
  for (const auto& r : records) {
    ++counts[static_cast<int>(r.status)];
    if (r.multi_day) ++multi_day;
  }
  out << "MATCH/MISMATCH/NO_DATA: " << counts[0] << "/" << counts[1] << "/" << counts[2] << " (" << records.size()
      << " orders, " << orders.rejects.size() << " rejected, " << multi_day << " multi-day)\n";
  return kExitOk;
}

int create_cmd(const std::string& activities_path, const std::string& matched_dir, const std::string& index_dir,
               const CommonFlags& flags, std::ostream& out) {
  const RunConfig config = flags.resolve();
  const LocalZone zone = LocalZone::load(config.timezone);
  const auto store = open_index(index_dir, config);
  const auto activities = parse_activities(read_file(activities_path), activities_path);
  const MatchedTracks tracks = read_matched_tracks(matched_dir);
  const auto rows = create_orders(activities.rows, tracks, store->catalog(), config.segment_time_options());

  const ReportMeta meta = config.to_meta();
  const fs::path report = flags.out;
  write_file_atomic(report, creation_report_csv(rows, zone, meta));
  write_file_atomic(json_sibling(report), creation_report_json(rows, zone, meta));
  write_rejects_sidecar(rejects_sibling(report), activities.rejects);

  std::size_t counts[3] = {0, 0, 0};
  double hours = 0.0;
  for (const auto& r : rows) {
    ++counts[static_cast<int>(r.status)];
    hours += r.total_hours;
  }
  out << "CREATED/ZERO/NO_DATA: " << counts[0] << "/" << counts[1] << "/" << counts[2] << " (" << rows.size()
      << " rows, " << activities.rejects.size() << " rejected, " << format_fixed(hours, 2) << " h)\n";
  return kExitOk;
}

// stats ---------------------------------------------------------------------------

int stats_cmd(const std::string& gps_path, const CommonFlags& flags, std::ostream& out) {
  const RunConfig config = flags.resolve();
  const LocalZone zone = LocalZone::load(config.timezone);
  const IngestResult ingest = ingest_gps(read_file(gps_path), gps_path, zone);
  const SamplingStats s = sampling_stats(ingest.tracks);

  out << s.total_points << " points, " << s.total_tracks << " tracks, " << s.total_intervals << " intervals\n";
  out << "min interval " << s.min_interval_s << " s; exactly 1 min " << format_fixed(s.fraction_exactly_1min, 4)
      << "; over 5 min " << format_fixed(s.fraction_over_5min, 4) << "\n";
  for (const auto& b : s.histogram) out << "  " << b.label << "\t" << b.count << "\n";

  if (!flags.out.empty()) {
    using Json = nlohmann::ordered_json;
    Json config_json = Json::object();
    for (const auto& [k, v] : config.to_meta()) config_json[k] = v;
    Json hist = Json::array();
    for (const auto& b : s.histogram) hist.push_back(Json{{"label", b.label}, {"count", b.count}});
    const Json doc{{"config", std::move(config_json)},
                   {"rows", ingest.rows},
                   {"rejected", ingest.rejects.size()},
                   {"total_points", s.total_points},
                   {"total_tracks", s.total_tracks},
                   {"total_intervals", s.total_intervals},
                   {"min_interval_s", s.min_interval_s},
                   {"fraction_exactly_1min", s.fraction_exactly_1min},
                   {"fraction_over_5min", s.fraction_over_5min},
                   {"histogram", std::move(hist)}};
    write_file_atomic(flags.out, doc.dump(1) + "\n");
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Snow-plow GPS map matching and work-order verification"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string inventory, markers, gps, index_dir, matched, orders, activities;

  auto* build = app.add_subcommand("build-index", "Build the geohash tile store from a road inventory");
  build->add_option("--inventory", inventory, "road inventory table")->required();
  build->add_option("--markers", markers, "mile marker table")->required();
  flags.attach(*build, true);

  auto* match = app.add_subcommand("match", "Snap GPS tracks to roads");
  match->add_option("--gps", gps, "GPS sample table")->required();
  match->add_option("--index", index_dir, "tile store directory")->required();
  flags.attach(*match, true);

  auto* verify_app = app.add_subcommand("verify", "Check reported work-order hours against tracks");
  verify_app->add_option("--orders", orders, "work-order table")->required();
  verify_app->add_option("--matched", matched, "matched-track directory")->required();
  verify_app->add_option("--index", index_dir, "tile store directory")->required();
  flags.attach(*verify_app, true);

  auto* create = app.add_subcommand("create", "Compute hours for vehicle activity rows");
  create->add_option("--activities", activities, "activity table")->required();
  create->add_option("--matched", matched, "matched-track directory")->required();
  create->add_option("--index", index_dir, "tile store directory")->required();
  flags.attach(*create, true);

  auto* stats = app.add_subcommand("stats", "GPS sampling interval statistics");
  stats->add_option("--gps", gps, "GPS sample table")->required();
  flags.attach(*stats, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*build) return build_index_cmd(inventory, markers, flags, out);
    if (*match) return match_cmd(gps, index_dir, flags, out);
    if (*verify_app) return verify_cmd(orders, matched, index_dir, flags, out);
    if (*create) return create_cmd(activities, matched, index_dir, flags, out);
    if (*stats) return stats_cmd(gps, flags, out);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace plowtrack::cli
