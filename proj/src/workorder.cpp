#include "plowtrack/workorder.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "plowtrack/csv.hpp"
#include "plowtrack/io.hpp"

namespace plowtrack {

namespace {

std::string_view reason_text(const std::invalid_argument& e) { return e.what(); }

}  // namespace

ParsedTable<WorkOrder> parse_work_orders(std::string_view text, std::string_view source) {
  ParsedTable<WorkOrder> out;
  const CsvTable table = parse_csv(text, source);
  if (table.header.empty()) return out;
  const ColumnMap cols(table.header, std::string(source));
  const auto c_wo = cols.require("WOId");
  const auto c_vehicle = cols.require("VehicleId");
  const auto c_date = cols.require("Date");
  const auto c_route = cols.require("RouteRef");
  const auto c_sp = cols.require("StartPost");
  const auto c_ep = cols.require("EndPost");
  const auto c_so = cols.require("StartOffset");
  const auto c_eo = cols.require("EndOffset");
  const auto c_hrs = cols.require("ReportedHrs");

  for (const auto& row : table.rows) {
    WorkOrder wo;
    wo.line = row.line;
    wo.wo_id = std::string(trim(cell(row, c_wo)));
    wo.vehicle_id = std::string(trim(cell(row, c_vehicle)));
    wo.route_ref = std::string(trim(cell(row, c_route)));
    if (wo.wo_id.empty()) {
      out.rejects.push_back({row.line, "missing WOId"});
      continue;
    }
    if (wo.vehicle_id.empty()) {
      out.rejects.push_back({row.line, "missing VehicleId"});
      continue;
    }
    const auto date = parse_date(cell(row, c_date));
    if (!date) {
      out.rejects.push_back({row.line, "bad Date"});
      continue;
    }
    wo.date = *date;
    const auto hrs = parse_double(cell(row, c_hrs));
    if (!hrs || *hrs < 0.0) {
      out.rejects.push_back({row.line, "bad ReportedHrs"});
      continue;
    }
    wo.reported_hours = *hrs;
    try {
      wo.posts = parse_post_range(cell(row, c_sp), cell(row, c_ep), cell(row, c_so), cell(row, c_eo));
    } catch (const std::invalid_argument& e) {
      out.rejects.push_back({row.line, std::string(reason_text(e))});
      continue;
    }
    out.rows.push_back(std::move(wo));
  }
  return out;
}

ParsedTable<VehicleActivity> parse_activities(std::string_view text, std::string_view source) {
  ParsedTable<VehicleActivity> out;
  const CsvTable table = parse_csv(text, source);
  if (table.header.empty()) return out;
  const ColumnMap cols(table.header, std::string(source));
  const auto c_vehicle = cols.require("VehicleId");
  const auto c_date = cols.require("Date");
  const auto c_route = cols.require("RouteRef");
  const auto c_sp = cols.find("StartPost");
  const auto c_ep = cols.find("EndPost");
  const auto c_so = cols.find("StartOffset");
  const auto c_eo = cols.find("EndOffset");

  for (const auto& row : table.rows) {
    VehicleActivity a;
    a.line = row.line;
    a.vehicle_id = std::string(trim(cell(row, c_vehicle)));
    a.route_ref = std::string(trim(cell(row, c_route)));
    if (a.vehicle_id.empty()) {
      out.rejects.push_back({row.line, "missing VehicleId"});
      continue;
    }
    const auto date = parse_date(cell(row, c_date));
    if (!date) {
      out.rejects.push_back({row.line, "bad Date"});
      continue;
    }
    a.date = *date;
    try {
      a.posts = parse_post_range(cell(row, c_sp), cell(row, c_ep), cell(row, c_so), cell(row, c_eo));
    } catch (const std::invalid_argument& e) {
      out.rejects.push_back({row.line, std::string(reason_text(e))});
      continue;
    }
    out.rows.push_back(std::move(a));
  }
  return out;
}

std::string_view to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Match:
      return "MATCH";
    case VerifyStatus::Mismatch:
      return "MISMATCH";
    case VerifyStatus::NoData:
      return "NO_DATA";
  }
  return "NO_DATA";
}

std::string_view to_string(CreationStatus s) {
  switch (s) {
    case CreationStatus::Created:
      return "CREATED";
    case CreationStatus::Zero:
      return "ZERO";
    case CreationStatus::NoData:
      return "NO_DATA";
  }
  return "NO_DATA";
}

VerifyStatus classify(double computed_hours, double reported_hours, FailureReason failure,
                      const VerifyOptions& options) {
  if (failure != FailureReason::None) return VerifyStatus::NoData;
  const double tolerance = std::max(options.abs_tol_hours, options.rel_tol * reported_hours);
  return std::abs(computed_hours - reported_hours) <= tolerance ? VerifyStatus::Match : VerifyStatus::Mismatch;
}

namespace {

SegmentSpan span_for(std::string label, std::string_view route_ref, const PostRange& posts) {
  return {std::move(label), road_name_to_type(route_ref), posts};
}

}  // namespace

std::vector<VerificationRecord> verify(std::span<const WorkOrder> orders, const MatchedTracks& tracks,
                                       const RoadCatalog& catalog, const VerifyOptions& options) {
  std::unordered_map<std::string, std::pair<LocalDate, LocalDate>> date_range;
  for (const auto& wo : orders) {
    auto [it, inserted] = date_range.try_emplace(wo.wo_id, wo.date, wo.date);
    if (!inserted) {
      it->second.first = std::min(it->second.first, wo.date);
      it->second.second = std::max(it->second.second, wo.date);
    }
  }

  std::vector<VerificationRecord> out;
  out.reserve(orders.size());
  for (const auto& wo : orders) {
    const auto result = compute_seconds(span_for(wo.wo_id, wo.route_ref, wo.posts), wo.vehicle_id, wo.date, tracks,
                                        catalog, options.segment_time);
    VerificationRecord rec;
    rec.order = wo;
    rec.computed_hours = result.computed_hours;
    rec.computed_seconds = result.computed_seconds;
    rec.reported_hours = wo.reported_hours;
    if (wo.reported_hours != 0.0) rec.match_ratio = result.computed_hours / wo.reported_hours;
    rec.failure = result.failure_reason;
    rec.status = classify(rec.computed_hours, rec.reported_hours, rec.failure, options);
    rec.points_used = result.points_used;
    const auto& range = date_range.at(wo.wo_id);
    rec.multi_day = range.first != range.second;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CreationRow> create_orders(std::span<const VehicleActivity> activities, const MatchedTracks& tracks,
                                       const RoadCatalog& catalog, const SegmentTimeOptions& options) {
  std::vector<CreationRow> out;
  out.reserve(activities.size());
  for (const auto& a : activities) {
    const auto result = compute_seconds(span_for(a.vehicle_id, a.route_ref, a.posts), a.vehicle_id, a.date, tracks,
                                        catalog, options);
    CreationRow row;
    row.activity = a;
    row.total_hours = result.computed_hours;
    row.total_seconds = result.computed_seconds;
    row.start_time = result.first_time;
    row.end_time = result.last_time;
    row.failure = result.failure_reason;
    if (row.failure != FailureReason::None) {
      row.status = CreationStatus::NoData;
    } else if (row.total_seconds == 0.0) {
      row.status = CreationStatus::Zero;
    } else {
      row.status = CreationStatus::Created;
    }
    out.push_back(std::move(row));
  }
  return out;
}

SpreadHistogram spread_histogram(std::span<const WorkOrder> orders) {
  std::map<std::string, std::pair<LocalDate, LocalDate>> ranges;
  for (const auto& wo : orders) {
    auto [it, inserted] = ranges.try_emplace(wo.wo_id, wo.date, wo.date);
    if (!inserted) {
      it->second.first = std::min(it->second.first, wo.date);
      it->second.second = std::max(it->second.second, wo.date);
    }
  }
  SpreadHistogram hist;
  int max_spread = 0;
  for (const auto& [id, range] : ranges) {
    const int spread = days_between(range.first, range.second) + 1;
    ++hist[spread];
    max_spread = std::max(max_spread, spread);
  }
  for (int s = 1; s <= max_spread; ++s) hist.try_emplace(s, 0);
  return hist;
}

// Reports ---------------------------------------------------------------------

namespace {

using Json = nlohmann::ordered_json;

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }
std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <typename T>
Json or_null(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

void append_meta_comment(std::string& out, const ReportMeta& meta) {
  for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
}

Json meta_json(const ReportMeta& meta) {
  Json j = Json::object();
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

std::string flags(FailureReason failure, bool multi_day) {
  std::string out;
  if (failure != FailureReason::None) out = std::string(to_string(failure));
  if (multi_day) out += (out.empty() ? "" : ";") + std::string("MULTI_DAY");
  return out;
}

std::string opt_time(const std::optional<Timestamp>& t, const LocalZone& zone) {
  return t ? zone.format(*t) : std::string();
}

}  // namespace

std::string verification_report_csv(std::span<const VerificationRecord> records, const ReportMeta& meta) {
  std::string out;
  append_meta_comment(out, meta);
  append_csv_record(out, {"WOId", "VehicleId", "Date", "RouteRef", "StartPost", "EndPost", "StartOffset", "EndOffset",
                          "ReportedHrs", "ComputedHrs", "MatchRatio", "Status", "Flags"});
  for (const auto& r : records) {
    const auto& wo = r.order;
    append_csv_record(out, {wo.wo_id, wo.vehicle_id, format_date(wo.date), wo.route_ref, opt_int(wo.posts.start_post),
                            opt_int(wo.posts.end_post), opt_double(wo.posts.start_offset),
                            opt_double(wo.posts.end_offset), format_fixed(r.reported_hours, 2),
                            format_fixed(r.computed_hours, 2), r.match_ratio ? format_fixed(*r.match_ratio, 3) : "",
                            std::string(to_string(r.status)), flags(r.failure, r.multi_day)});
  }
  return out;
}

std::string verification_report_json(std::span<const VerificationRecord> records, const ReportMeta& meta) {
  Json rows = Json::array();
  for (const auto& r : records) {
    const auto& wo = r.order;
    rows.push_back(Json{{"wo_id", wo.wo_id},
                        {"vehicle_id", wo.vehicle_id},
                        {"date", format_date(wo.date)},
                        {"route_ref", wo.route_ref},
                        {"start_post", or_null(wo.posts.start_post)},
                        {"end_post", or_null(wo.posts.end_post)},
                        {"start_offset", or_null(wo.posts.start_offset)},
                        {"end_offset", or_null(wo.posts.end_offset)},
                        {"reported_hrs", r.reported_hours},
                        {"computed_hrs", r.computed_hours},
                        {"computed_seconds", r.computed_seconds},
                        {"match_ratio", or_null(r.match_ratio)},
                        {"status", to_string(r.status)},
                        {"failure", to_string(r.failure)},
                        {"multi_day", r.multi_day},
                        {"points_used", r.points_used}});
  }
  return Json{{"config", meta_json(meta)}, {"records", std::move(rows)}}.dump(1) + "\n";
}

std::string creation_report_csv(std::span<const CreationRow> rows, const LocalZone& zone, const ReportMeta& meta) {
  std::string out;
  append_meta_comment(out, meta);
  append_csv_record(out, {"VehicleId", "Date", "RouteRef", "StartPost", "EndPost", "StartOffset", "EndOffset",
                          "TotalHrs", "StartTime", "EndTime", "Status", "Flags"});
  for (const auto& r : rows) {
    const auto& a = r.activity;
    append_csv_record(out, {a.vehicle_id, format_date(a.date), a.route_ref, opt_int(a.posts.start_post),
                            opt_int(a.posts.end_post), opt_double(a.posts.start_offset), opt_double(a.posts.end_offset),
                            format_fixed(r.total_hours, 2), opt_time(r.start_time, zone), opt_time(r.end_time, zone),
                            std::string(to_string(r.status)), flags(r.failure, false)});
  }
  return out;
}

std::string creation_report_json(std::span<const CreationRow> rows, const LocalZone& zone, const ReportMeta& meta) {
  Json list = Json::array();
  for (const auto& r : rows) {
    const auto& a = r.activity;
    list.push_back(Json{{"vehicle_id", a.vehicle_id},
                        {"date", format_date(a.date)},
                        {"route_ref", a.route_ref},
                        {"start_post", or_null(a.posts.start_post)},
                        {"end_post", or_null(a.posts.end_post)},
                        {"start_offset", or_null(a.posts.start_offset)},
                        {"end_offset", or_null(a.posts.end_offset)},
                        {"total_hrs", r.total_hours},
                        {"total_seconds", r.total_seconds},
                        {"start_time", r.start_time ? Json(zone.format(*r.start_time)) : Json(nullptr)},
                        {"end_time", r.end_time ? Json(zone.format(*r.end_time)) : Json(nullptr)},
                        {"status", to_string(r.status)},
                        {"failure", to_string(r.failure)}});
  }
  return Json{{"config", meta_json(meta)}, {"rows", std::move(list)}}.dump(1) + "\n";
}

}  // namespace plowtrack
