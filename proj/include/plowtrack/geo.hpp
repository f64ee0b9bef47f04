#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plowtrack {

/// Mean Earth radius used for every distance in the engine.
inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kMetersPerMile = 1609.344;

/// Latitude/longitude in degrees. Latitude must lie in [-90, 90]; longitude
/// is normalized into [-180, 180). Non-finite input throws
/// std::invalid_argument.
class Coordinate {
 public:
  Coordinate() = default;
  Coordinate(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const Coordinate&, const Coordinate&) = default;
  friend auto operator<=>(const Coordinate&, const Coordinate&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

/// Signed longitude difference `to - from`, wrapped into [-180, 180).
double lon_delta(double from, double to);

/// Axis-aligned box in degrees; bounds are inclusive.
struct GeoBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool contains(const Coordinate& c) const {
    return c.lat() >= lat_min && c.lat() <= lat_max && c.lon() >= lon_min && c.lon() <= lon_max;
  }
  double height() const { return lat_max - lat_min; }
  double width() const { return lon_max - lon_min; }
  Coordinate center() const;

  friend bool operator==(const GeoBox&, const GeoBox&) = default;
};

inline constexpr int kMaxGeohashPrecision = 12;
inline constexpr std::string_view kGeohashAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";

/// A lowercase base-32 geohash of length 1..12.
class GeohashId {
 public:
  GeohashId() = default;
  /// Throws std::invalid_argument on characters outside the alphabet or a
  /// length outside [1, 12]. Uppercase input is accepted and lowered.
  explicit GeohashId(std::string_view code);

  const std::string& str() const { return code_; }
  int precision() const { return static_cast<int>(code_.size()); }

  friend bool operator==(const GeohashId&, const GeohashId&) = default;
  friend auto operator<=>(const GeohashId&, const GeohashId&) = default;

 private:
  std::string code_;
};

/// Interleaved-bit geohash, longitude bit first. Throws std::invalid_argument
/// when precision is outside [1, 12].
GeohashId geohash_encode(const Coordinate& c, int precision);

/// Cell bounds of a geohash.
GeoBox geohash_decode(const GeohashId& g);

/// Cell size in degrees at `precision`: {height (lat), width (lon)}.
struct CellSize {
  double lat_deg;
  double lon_deg;
};
CellSize geohash_cell_size(int precision);

/// The cell itself plus its existing grid neighbours, sorted. Longitude wraps
/// at the antimeridian; cells past a pole are omitted.
std::vector<GeohashId> geohash_neighbors(const GeohashId& g);

/// Haversine distance in meters.
double great_circle_distance(const Coordinate& a, const Coordinate& b);

/// Ordered vertices, at least two, no two consecutive vertices equal.
/// Cumulative great-circle arc length is cached at construction.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Coordinate> vertices);

  std::span<const Coordinate> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Coordinate& operator[](std::size_t i) const { return vertices_[i]; }

  /// Arc length from the first vertex to vertex i, in meters.
  double arc_to(std::size_t i) const { return cumulative_[i]; }
  double length_m() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  GeoBox bounds() const;

  /// Point at the given fraction of total arc length (clamped to [0, 1]).
  Coordinate point_at(double fraction) const;

  /// Sub-line between two arc fractions, `from` < `to`. Throws
  /// std::invalid_argument if the slice collapses to a single point.
  Polyline slice(double from, double to) const;

  Polyline reversed() const;

  friend bool operator==(const Polyline& a, const Polyline& b) { return a.vertices_ == b.vertices_; }

 private:
  std::vector<Coordinate> vertices_;
  std::vector<double> cumulative_;
};

struct PolylineProjection {
  double distance_m = 0.0;
  Coordinate foot;
  /// Arc length position of `foot` divided by the line's total length.
  double arc_fraction = 0.0;
};

/// Closest point on `line` to `p`. Each segment is projected in a local
/// equirectangular frame; the reported distance is the great-circle distance
/// to the chosen foot, never more than the distance to any vertex.
PolylineProjection point_to_polyline(const Coordinate& p, const Polyline& line);

}  // namespace plowtrack
