#pragma once

#include <algorithm>

namespace plowtrack {

/// Snap distances for road selection, in meters.
struct MatchThresholds {
  double interstate_m = 200.0;
  double state_m = 100.0;
  double local_m = 50.0;
  /// How far the previous point's road may be and still be kept.
  double hint_m = 250.0;

  double max_class() const { return std::max({interstate_m, state_m, local_m}); }
  double max_all() const { return std::max(max_class(), hint_m); }

  /// Throws std::invalid_argument unless all values are positive and
  /// hint_m >= every class threshold.
  void validate() const;

  friend bool operator==(const MatchThresholds&, const MatchThresholds&) = default;
};

}  // namespace plowtrack
