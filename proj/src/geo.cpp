#include "plowtrack/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace plowtrack {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

int lon_bits(int precision) { return (5 * precision + 1) / 2; }
int lat_bits(int precision) { return (5 * precision) / 2; }

int alphabet_index(char ch) {
  const auto pos = kGeohashAlphabet.find(ch);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

double normalize_lon(double lon) {
  if (lon >= -180.0 && lon < 180.0) return lon;
  double wrapped = std::fmod(lon + 180.0, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  wrapped -= 180.0;
  // fmod can land exactly on +180 after the shift back.
  return wrapped >= 180.0 ? wrapped - 360.0 : wrapped;
}

}  // namespace

Coordinate::Coordinate(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon)) {
    throw std::invalid_argument("coordinate must be finite");
  }
  if (lat < -90.0 || lat > 90.0) {
    throw std::invalid_argument("latitude out of range: " + std::to_string(lat));
  }
  lat_ = lat;
  lon_ = normalize_lon(lon);
}

double lon_delta(double from, double to) {
  double d = to - from;
  if (d >= 180.0) d -= 360.0;
  if (d < -180.0) d += 360.0;
  return d;
}

Coordinate GeoBox::center() const {
  return {(lat_min + lat_max) / 2.0, (lon_min + lon_max) / 2.0};
}

GeohashId::GeohashId(std::string_view code) {
  if (code.empty() || code.size() > static_cast<std::size_t>(kMaxGeohashPrecision)) {
    throw std::invalid_argument("geohash length must be in [1, 12]: '" + std::string(code) + "'");
  }
  code_.reserve(code.size());
  for (char ch : code) {
    const char lower = (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
    if (alphabet_index(lower) < 0) {
      throw std::invalid_argument("invalid geohash character in '" + std::string(code) + "'");
    }
    code_.push_back(lower);
  }
}

GeohashId geohash_encode(const Coordinate& c, int precision) {
  if (precision < 1 || precision > kMaxGeohashPrecision) {
    throw std::invalid_argument("geohash precision must be in [1, 12], got " +
                                std::to_string(precision));
  }
  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
  std::string code(static_cast<std::size_t>(precision), '0');
  bool even = true;  // longitude bit first
  for (int i = 0; i < precision; ++i) {
    int value = 0;
    for (int bit = 0; bit < 5; ++bit) {
      value <<= 1;
      if (even) {
        const double mid = (lon_lo + lon_hi) / 2.0;
        if (c.lon() >= mid) {
          value |= 1;
          lon_lo = mid;
        } else {
          lon_hi = mid;
        }
      } else {
        const double mid = (lat_lo + lat_hi) / 2.0;
        if (c.lat() >= mid) {
          value |= 1;
          lat_lo = mid;
        } else {
          lat_hi = mid;
        }
      }
      even = !even;
    }
    code[static_cast<std::size_t>(i)] = kGeohashAlphabet[static_cast<std::size_t>(value)];
  }
  return GeohashId(code);
}

GeoBox geohash_decode(const GeohashId& g) {
  GeoBox box{-90.0, 90.0, -180.0, 180.0};
  bool even = true;
  for (char ch : g.str()) {
    const int value = alphabet_index(ch);
    for (int bit = 4; bit >= 0; --bit) {
      const bool set = ((value >> bit) & 1) != 0;
      if (even) {
        const double mid = (box.lon_min + box.lon_max) / 2.0;
        (set ? box.lon_min : box.lon_max) = mid;
      } else {
        const double mid = (box.lat_min + box.lat_max) / 2.0;
        (set ? box.lat_min : box.lat_max) = mid;
      }
      even = !even;
    }
  }
  return box;
}

CellSize geohash_cell_size(int precision) {
  return {180.0 / std::ldexp(1.0, lat_bits(precision)), 360.0 / std::ldexp(1.0, lon_bits(precision))};
}

std::vector<GeohashId> geohash_neighbors(const GeohashId& g) {
  const GeoBox box = geohash_decode(g);
  const Coordinate c = box.center();
  std::vector<GeohashId> out;
  out.reserve(9);
  for (int dy = -1; dy <= 1; ++dy) {
    const double lat = c.lat() + dy * box.height();
    if (lat < -90.0 || lat > 90.0) continue;
    for (int dx = -1; dx <= 1; ++dx) {
      out.push_back(geohash_encode(Coordinate(lat, c.lon() + dx * box.width()), g.precision()));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double great_circle_distance(const Coordinate& a, const Coordinate& b) {
  const double dlat = (b.lat() - a.lat()) * kDegToRad;
  const double dlon = lon_delta(a.lon(), b.lon()) * kDegToRad;
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  double h = s_lat * s_lat + std::cos(a.lat() * kDegToRad) * std::cos(b.lat() * kDegToRad) * s_lon * s_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

namespace {

Coordinate lerp(const Coordinate& a, const Coordinate& b, double t) {
  return {a.lat() + t * (b.lat() - a.lat()), a.lon() + t * lon_delta(a.lon(), b.lon())};
}

}  // namespace

Polyline::Polyline(std::vector<Coordinate> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) {
    throw std::invalid_argument("polyline needs at least two vertices");
  }
  cumulative_.reserve(vertices_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    if (vertices_[i] == vertices_[i - 1]) {
      throw std::invalid_argument("polyline has consecutive identical vertices at index " +
                                  std::to_string(i));
    }
    cumulative_.push_back(cumulative_.back() + great_circle_distance(vertices_[i - 1], vertices_[i]));
  }
}

GeoBox Polyline::bounds() const {
  GeoBox box{vertices_.front().lat(), vertices_.front().lat(), vertices_.front().lon(),
             vertices_.front().lon()};
  for (const auto& v : vertices_) {
    box.lat_min = std::min(box.lat_min, v.lat());
    box.lat_max = std::max(box.lat_max, v.lat());
    box.lon_min = std::min(box.lon_min, v.lon());
    box.lon_max = std::max(box.lon_max, v.lon());
  }
  return box;
}

Coordinate Polyline::point_at(double fraction) const {
  const double target = std::clamp(fraction, 0.0, 1.0) * length_m();
  if (target <= 0.0) return vertices_.front();
  if (target >= length_m()) return vertices_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const auto i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  const double seg = cumulative_[i + 1] - cumulative_[i];
  const double t = seg > 0.0 ? (target - cumulative_[i]) / seg : 0.0;
  return lerp(vertices_[i], vertices_[i + 1], t);
}

Polyline Polyline::slice(double from, double to) const {
  from = std::clamp(from, 0.0, 1.0);
  to = std::clamp(to, 0.0, 1.0);
  if (!(from < to)) throw std::invalid_argument("empty polyline slice");
  const double lo = from * length_m();
  const double hi = to * length_m();
  std::vector<Coordinate> out;
  out.push_back(point_at(from));
  for (std::size_t i = 1; i + 1 < vertices_.size(); ++i) {
    if (cumulative_[i] > lo && cumulative_[i] < hi && vertices_[i] != out.back()) {
      out.push_back(vertices_[i]);
    }
  }
  const Coordinate end = point_at(to);
  if (end != out.back()) out.push_back(end);
  return Polyline(std::move(out));
}

Polyline Polyline::reversed() const {
  return Polyline(std::vector<Coordinate>(vertices_.rbegin(), vertices_.rend()));
}

PolylineProjection point_to_polyline(const Coordinate& p, const Polyline& line) {
  const auto verts = line.vertices();
  const double ky = kEarthRadiusM * kDegToRad;
  const double kx = ky * std::cos(p.lat() * kDegToRad);

  std::size_t best_seg = 0;
  double best_t = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    const Coordinate& a = verts[i];
    const Coordinate& b = verts[i + 1];
    const double bx = lon_delta(a.lon(), b.lon()) * kx;
    const double by = (b.lat() - a.lat()) * ky;
    const double px = lon_delta(a.lon(), p.lon()) * kx;
    const double py = (p.lat() - a.lat()) * ky;
    const double len2 = bx * bx + by * by;
    double t = len2 > 0.0 ? (px * bx + py * by) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - t * bx;
    const double dy = py - t * by;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_seg = i;
      best_t = t;
    }
  }

  PolylineProjection out;
  out.foot = lerp(verts[best_seg], verts[best_seg + 1], best_t);
  out.distance_m = great_circle_distance(p, out.foot);
  double arc = line.arc_to(best_seg) + best_t * (line.arc_to(best_seg + 1) - line.arc_to(best_seg));
  for (std::size_t j = 0; j < verts.size(); ++j) {
    const double d = great_circle_distance(p, verts[j]);
    if (d < out.distance_m) {
      out.distance_m = d;
      out.foot = verts[j];
      arc = line.arc_to(j);
    }
  }
  const double total = line.length_m();
  out.arc_fraction = total > 0.0 ? std::clamp(arc / total, 0.0, 1.0) : 0.0;
  return out;
}

}  // namespace plowtrack
