#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "plowtrack/inventory.hpp"
#include "plowtrack/match.hpp"

namespace plowtrack {

/// Largest gap credited between two consecutive samples.
inline constexpr double kDefaultDurationCapSeconds = 600.0;

enum class FailureReason { None, NoRouteRef, NoMileMarkers, PostNotFound, NoTrack };

std::string_view to_string(FailureReason r);

/// Offset-adjusted milepost bounds plus the markers that had to exist.
struct EffectiveBounds {
  double lower = 0.0;
  double upper = 0.0;
  int start_marker = 0;
  int end_marker = 0;
};

struct BoundsOutcome {
  FailureReason failure = FailureReason::None;
  EffectiveBounds bounds;

  bool ok() const { return failure == FailureReason::None; }
};

/// Requires both posts. Bounds are (start_post + start_offset,
/// end_post + end_offset). The start marker looked up is the preceding one
/// when start_offset < 0, the end marker the following one when
/// end_offset > 0; a missing one gives PostNotFound, an empty marker list
/// NoMileMarkers.
BoundsOutcome effective_bounds(const PostRange& posts, std::span<const MileMarker> markers);

/// The linear-referencing description of the stretch being measured: an
/// inventory segment, a work order or an activity row.
struct SegmentSpan {
  std::string segment_id;
  RouteRef route;
  PostRange posts;
};

SegmentSpan span_of(const RoadSegment& seg);

struct SegmentTimeOptions {
  double cap_seconds = kDefaultDurationCapSeconds;
};

struct SegmentTimeResult {
  std::string segment_id;
  std::string vehicle_id;
  LocalDate day;
  double computed_seconds = 0.0;
  double computed_hours = 0.0;
  std::size_t points_used = 0;
  FailureReason failure_reason = FailureReason::None;
  /// Times of the first and last qualifying points.
  std::optional<Timestamp> first_time;
  std::optional<Timestamp> last_time;
};

/// Seconds the vehicle spent on the span on `day`. A point qualifies when its
/// road belongs to the span's route and, if the span has both posts, its
/// milepost lies within the effective bounds (inclusive). Each qualifying
/// point with a successor in the day track credits
/// min(successor time - its time, cap) in whole Unix seconds.
SegmentTimeResult compute_seconds(const SegmentSpan& seg, std::string_view vehicle_id, LocalDate day,
                                  const MatchedTracks& tracks, const RoadCatalog& catalog,
                                  const SegmentTimeOptions& options = {});

}  // namespace plowtrack
