#include "plowtrack/segment_time.hpp"

#include <algorithm>

namespace plowtrack {

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None:
      return "None";
    case FailureReason::NoRouteRef:
      return "NoRouteRef";
    case FailureReason::NoMileMarkers:
      return "NoMileMarkers";
    case FailureReason::PostNotFound:
      return "PostNotFound";
    case FailureReason::NoTrack:
      return "NoTrack";
  }
  return "None";
}

BoundsOutcome effective_bounds(const PostRange& posts, std::span<const MileMarker> markers) {
  BoundsOutcome out;
  if (markers.empty()) {
    out.failure = FailureReason::NoMileMarkers;
    return out;
  }
  const double start_offset = posts.start_offset.value_or(0.0);
  const double end_offset = posts.end_offset.value_or(0.0);
  const int start_marker = *posts.start_post - (start_offset < 0.0 ? 1 : 0);
  const int end_marker = *posts.end_post + (end_offset > 0.0 ? 1 : 0);
  const auto has = [&](int post) {
    return std::any_of(markers.begin(), markers.end(), [&](const MileMarker& m) { return m.post == post; });
  };
  if (!has(start_marker) || !has(end_marker)) {
    out.failure = FailureReason::PostNotFound;
    return out;
  }
  out.bounds = {*posts.start_post + start_offset, *posts.end_post + end_offset, start_marker, end_marker};
  return out;
}

SegmentSpan span_of(const RoadSegment& seg) { return {seg.segment_id, seg.route, seg.posts}; }

SegmentTimeResult compute_seconds(const SegmentSpan& seg, std::string_view vehicle_id, LocalDate day,
                                  const MatchedTracks& tracks, const RoadCatalog& catalog,
                                  const SegmentTimeOptions& options) {
  SegmentTimeResult result;
  result.segment_id = seg.segment_id;
  result.vehicle_id = std::string(vehicle_id);
  result.day = day;

  if (!seg.route.valid()) {
    result.failure_reason = FailureReason::NoRouteRef;
    return result;
  }

  std::optional<EffectiveBounds> bounds;
  if (seg.posts.has_bounds()) {
    const auto outcome = effective_bounds(seg.posts, catalog.markers(seg.route.canonical_name));
    if (!outcome.ok()) {
      result.failure_reason = outcome.failure;
      return result;
    }
    bounds = outcome.bounds;
  }

  const auto it = tracks.find(DayKey{day, std::string(vehicle_id)});
  if (it == tracks.end() || it->second.points.empty()) {
    result.failure_reason = FailureReason::NoTrack;
    return result;
  }

  const auto& points = it->second.points;
  double seconds = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const MatchedPoint& p = points[i];
    if (!p.road) continue;
    const RoadSegment* road = catalog.find(*p.road);
    if (road == nullptr || !road->route.valid() || road->route.canonical_name != seg.route.canonical_name) continue;
    if (bounds) {
      if (!p.milepost || *p.milepost < bounds->lower || *p.milepost > bounds->upper) continue;
    }
    ++result.points_used;
    if (!result.first_time) result.first_time = p.point.time;
    result.last_time = p.point.time;
    if (i + 1 < points.size()) {
      const auto gap = static_cast<double>(unix_seconds(points[i + 1].point.time) - unix_seconds(p.point.time));
      seconds += std::min(gap, options.cap_seconds);
    }
  }
  result.computed_seconds = seconds;
  result.computed_hours = seconds / 3600.0;
  return result;
}

}  // namespace plowtrack
