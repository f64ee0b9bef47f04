#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plowtrack/inventory.hpp"
#include "plowtrack/match.hpp"
#include "plowtrack/segment_time.hpp"
#include "plowtrack/tracks.hpp"

namespace plowtrack {

struct WorkOrder {
  std::string wo_id;
  std::string vehicle_id;
  LocalDate date;
  std::string route_ref;
  PostRange posts;
  double reported_hours = 0.0;
  std::size_t line = 0;
};

struct VehicleActivity {
  std::string vehicle_id;
  LocalDate date;
  std::string route_ref;
  PostRange posts;
  std::size_t line = 0;
};

template <typename Row>
struct ParsedTable {
  std::vector<Row> rows;
  std::vector<RejectedRow> rejects;
};

/// Columns WOId, VehicleId, Date, RouteRef, StartPost, EndPost, StartOffset,
/// EndOffset, ReportedHrs. Bad rows are rejected with a reason; a blank
/// RouteRef is kept (it verifies as NO_DATA). Throws FormatError on a
/// missing column.
ParsedTable<WorkOrder> parse_work_orders(std::string_view text, std::string_view source);

/// Columns VehicleId, Date, RouteRef; StartPost, EndPost, StartOffset and
/// EndOffset are optional.
ParsedTable<VehicleActivity> parse_activities(std::string_view text, std::string_view source);

enum class VerifyStatus { Match, Mismatch, NoData };
std::string_view to_string(VerifyStatus s);

struct VerifyOptions {
  double abs_tol_hours = 0.25;
  double rel_tol = 0.10;
  SegmentTimeOptions segment_time;
};

/// NO_DATA for any failure; otherwise MATCH iff
/// |computed - reported| <= max(abs_tol, rel_tol * reported).
VerifyStatus classify(double computed_hours, double reported_hours, FailureReason failure, const VerifyOptions& options);

struct VerificationRecord {
  WorkOrder order;
  double computed_hours = 0.0;
  double computed_seconds = 0.0;
  double reported_hours = 0.0;
  std::optional<double> match_ratio;  // empty when reported is 0
  VerifyStatus status = VerifyStatus::NoData;
  FailureReason failure = FailureReason::None;
  std::size_t points_used = 0;
  /// The order's id also appears on other dates.
  bool multi_day = false;
};

/// One record per order, in input order, each computed over the order's own
/// date.
std::vector<VerificationRecord> verify(std::span<const WorkOrder> orders, const MatchedTracks& tracks,
                                       const RoadCatalog& catalog, const VerifyOptions& options = {});

enum class CreationStatus { Created, Zero, NoData };
std::string_view to_string(CreationStatus s);

struct CreationRow {
  VehicleActivity activity;
  double total_hours = 0.0;
  double total_seconds = 0.0;
  std::optional<Timestamp> start_time;
  std::optional<Timestamp> end_time;
  CreationStatus status = CreationStatus::NoData;
  FailureReason failure = FailureReason::None;
};

/// One row per activity in input order, zero-hour rows included.
std::vector<CreationRow> create_orders(std::span<const VehicleActivity> activities, const MatchedTracks& tracks,
                                       const RoadCatalog& catalog, const SegmentTimeOptions& options = {});

/// Work orders per day spread, keyed 1..max spread; spans with no orders
/// are present with count 0.
using SpreadHistogram = std::map<int, std::size_t>;

/// Groups rows by wo_id; spread = (max date - min date) + 1 days.
SpreadHistogram spread_histogram(std::span<const WorkOrder> orders);

// Reports -------------------------------------------------------------------

/// Resolved run settings echoed into every report, in order.
using ReportMeta = std::vector<std::pair<std::string, std::string>>;

std::string verification_report_csv(std::span<const VerificationRecord> records, const ReportMeta& meta);
std::string verification_report_json(std::span<const VerificationRecord> records, const ReportMeta& meta);
std::string creation_report_csv(std::span<const CreationRow> rows, const LocalZone& zone, const ReportMeta& meta);
std::string creation_report_json(std::span<const CreationRow> rows, const LocalZone& zone, const ReportMeta& meta);

}  // namespace plowtrack
